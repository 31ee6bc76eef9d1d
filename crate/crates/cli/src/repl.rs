//! Line-oriented stepper.
//!
//! Shows the current configuration and its enabled moves, numbered from 1.
//! A move is chosen by number or edge id; `reset` returns to the initial
//! configuration and `quit` (or end of input) leaves.

use std::io::{self, BufRead, Write};

use rgraph::{EdgeSet, StepEffect, ValidatedGraph};

fn set(g: &ValidatedGraph, s: &EdgeSet) -> String {
    format!("{{{}}}", g.edge_set_names(s).join(", "))
}

fn print_effect<W: Write>(g: &ValidatedGraph, e: &StepEffect, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "fired {} ({})",
        g.edge_name(e.fired),
        g.action_name(e.action)
    )?;
    writeln!(out, "  triggered:   {}", set(g, &e.triggered))?;
    writeln!(out, "  activated:   {}", set(g, &e.activated))?;
    writeln!(out, "  deactivated: {}", set(g, &e.deactivated))?;
    if !e.conflicts.is_empty() {
        writeln!(
            out,
            "  conflicts:   {} (deactivation wins)",
            set(g, &e.conflicts)
        )?;
    }
    Ok(())
}

pub fn run<R: BufRead, W: Write>(g: &ValidatedGraph, input: R, mut out: W) -> io::Result<()> {
    let mut current = g.initial_configuration();
    let mut lines = input.lines();
    loop {
        let moves = g.enabled(&current);
        writeln!(out, "{}", g.describe(&current))?;
        if moves.is_empty() {
            writeln!(out, "no enabled transitions")?;
        }
        for (i, m) in moves.iter().enumerate() {
            writeln!(
                out,
                "  {}) {} ({}) -> {}",
                i + 1,
                g.edge_name(m.edge),
                g.action_name(m.action),
                g.state_name(m.target)
            )?;
        }
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next().transpose()? else {
            writeln!(out)?;
            return Ok(());
        };
        let choice = line.trim();
        match choice {
            "quit" | "q" => return Ok(()),
            "reset" | "r" => {
                current = g.initial_configuration();
                continue;
            }
            "" => continue,
            _ => {}
        }
        let picked = match choice.parse::<usize>() {
            Ok(n) => n.checked_sub(1).and_then(|i| moves.get(i)),
            Err(_) => moves.iter().find(|m| g.edge_name(m.edge) == choice),
        };
        match picked {
            Some(m) => {
                let effect = g.step(&current, m.edge).expect("listed moves are enabled");
                print_effect(g, &effect, &mut out)?;
                current = effect.next;
            }
            None => writeln!(out, "`{choice}` is not an enabled move")?,
        }
    }
}
