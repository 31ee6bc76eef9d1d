//! `rgraph`: check, expand, analyse, compare, step through and serve
//! reactive graph models.
//!
//! Exit codes: 0 when the command succeeded and any checked property holds,
//! 1 when a property is violated (deadlocks, conflicts, not bisimilar), 2 on
//! usage, I/O or parse errors.

use std::fs;
use std::io::{self, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgraph::analysis::{bisimilar_lts, Analysis, BisimResult, Trace};
use rgraph::dsl::{parse, parse_intrusions, parse_model, Diagnostic, ParsedInput};
use rgraph::export::{
    lts_diagram, lts_to_json, product_lts_diagram, product_lts_json, DiagramFormat,
};
use rgraph::products::{IntrusionSpec, ProductMode, ProductSystem};
use rgraph::session::Session;
use rgraph::{expand, stats, ValidatedGraph, DEFAULT_MAX_STATES};

mod repl;

#[derive(Parser)]
#[command(name = "rgraph", version, about = "Multi-action reactive graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model (`.rg`) or intrusion file (`.ri`).
    Check { file: PathBuf },
    /// Print the induced LTS.
    Lts {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print graph and LTS sizes.
    Stats {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
    },
    /// Look for deadlocks, contradictory effects and unreachable parts.
    /// With no selection flags, runs every analysis.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        deadlocks: bool,
        #[arg(long)]
        conflicts: bool,
        #[arg(long)]
        unreachable: bool,
        #[command(flatten)]
        bound: Bound,
    },
    /// Decide strong bisimilarity of the two models in a `A ~ B` file.
    Bisim {
        file: PathBuf,
        #[command(flatten)]
        bound: Bound,
    },
    /// Step through the semantics interactively.
    Step { file: PathBuf },
    /// Compose two models.
    Product {
        left: PathBuf,
        right: PathBuf,
        /// Intrusive edges between the components.
        #[arg(long)]
        intrusions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Async)]
        mode: Mode,
        /// Expand the product instead of listing its initial moves.
        #[arg(long)]
        expand: bool,
        /// Print the expanded product in this format instead of a summary.
        #[arg(long, value_enum, requires = "expand")]
        format: Option<Format>,
        #[command(flatten)]
        bound: Bound,
    },
    /// Run the JSON session protocol.
    Serve {
        /// Read requests from stdin and answer on stdout (the default).
        #[arg(long, conflicts_with = "port")]
        stdio: bool,
        /// Listen on 127.0.0.1 at this port; every connection is its own session.
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Args)]
struct Bound {
    /// Stop exploring after this many configurations.
    #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Mermaid,
}

impl Format {
    fn diagram(self) -> Option<DiagramFormat> {
        match self {
            Format::Json => None,
            Format::Dot => Some(DiagramFormat::Dot),
            Format::Mermaid => Some(DiagramFormat::Mermaid),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Async,
    Sync,
}

/// Why a command stopped early; always exit code 2.
struct Failure(String);

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn diagnostics(path: &Path, src: &str, diags: &[Diagnostic]) -> Failure {
    let rendered: Vec<String> = diags
        .iter()
        .map(|d| d.render(&path.display().to_string(), src))
        .collect();
    Failure(rendered.join("\n"))
}

fn load_input(path: &Path) -> Result<ParsedInput, Failure> {
    let src = read(path)?;
    parse(&src).map_err(|d| diagnostics(path, &src, &d))
}

fn load_model(path: &Path) -> Result<ValidatedGraph, Failure> {
    let src = read(path)?;
    parse_model(&src).map_err(|d| diagnostics(path, &src, &d))
}

fn warn_truncated(truncated: bool, bound: usize) {
    if truncated {
        eprintln!("warning: expansion stopped at {bound} states; results are partial");
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn describe(g: &ValidatedGraph) -> String {
    format!(
        "{} ({} states, {} ground, {} hyper)",
        g.name(),
        g.state_count(),
        g.ground_count(),
        g.hyper_count()
    )
}

fn check(file: &Path) -> Outcome {
    if file.extension().is_some_and(|e| e == "ri") {
        let src = read(file)?;
        let raw = parse_intrusions(&src).map_err(|d| diagnostics(file, &src, &d))?;
        println!("ok: {}", plural(raw.len(), "intrusion"));
        return Ok(ExitCode::SUCCESS);
    }
    let input = load_input(file)?;
    match &input.comparand {
        Some(c) => println!("ok: {} ~ {}", describe(&input.primary), describe(c)),
        None => println!("ok: {}", describe(&input.primary)),
    }
    Ok(ExitCode::SUCCESS)
}

fn lts(file: &Path, bound: usize, format: Format) -> Outcome {
    let g = load_model(file)?;
    let lts = expand(&g, Some(bound));
    warn_truncated(lts.truncated, bound);
    match format.diagram() {
        None => println!("{}", lts_to_json(&g, &lts)),
        Some(f) => print!("{}", lts_diagram(&g, &lts, f)),
    }
    Ok(ExitCode::SUCCESS)
}

fn print_stats(file: &Path, bound: usize) -> Outcome {
    let g = load_model(file)?;
    let lts = expand(&g, Some(bound));
    warn_truncated(lts.truncated, bound);
    println!("{}", stats(&g, &lts));
    Ok(ExitCode::SUCCESS)
}

fn via(g: &ValidatedGraph, t: &Trace) -> String {
    format!("via {}", t.describe(g))
}

fn analyze(
    file: &Path,
    mut deadlocks: bool,
    mut conflicts: bool,
    mut unreachable: bool,
    bound: usize,
) -> Outcome {
    if !(deadlocks || conflicts || unreachable) {
        (deadlocks, conflicts, unreachable) = (true, true, true);
    }
    let g = load_model(file)?;
    let lts = expand(&g, Some(bound));
    warn_truncated(lts.truncated, bound);
    let a = Analysis::with_lts(&g, lts);
    let mut summary = Vec::new();
    let mut violated = false;
    if deadlocks {
        let found = a.deadlocks();
        for d in &found {
            println!(
                "deadlock: {} {}",
                g.describe(&d.configuration),
                via(&g, &d.trace)
            );
        }
        violated |= !found.is_empty();
        summary.push(plural(found.len(), "deadlock"));
    }
    if conflicts {
        let found = a.conflicts();
        for c in &found {
            println!(
                "conflict: {} both enables and disables {{{}}} {}",
                g.edge_name(c.fired),
                g.edge_set_names(&c.conflicting).join(", "),
                via(&g, &c.trace)
            );
        }
        violated |= !found.is_empty();
        summary.push(plural(found.len(), "conflict"));
    }
    if unreachable {
        let states: Vec<&str> = a
            .unreachable_states()
            .iter()
            .map(|s| g.state_name(*s))
            .collect();
        let edges = a.unreachable_edges();
        let list = |v: &[rgraph::EdgeIx]| {
            v.iter()
                .map(|e| g.edge_name(*e))
                .collect::<Vec<_>>()
                .join(", ")
        };
        if !states.is_empty() {
            println!("unreachable states: {}", states.join(", "));
        }
        if !edges.never_fired.is_empty() {
            println!("never fired: {}", list(&edges.never_fired));
        }
        if !edges.never_triggered.is_empty() {
            println!("never triggered: {}", list(&edges.never_triggered));
        }
        summary.push(plural(states.len(), "unreachable state"));
        summary.push(plural(
            edges.never_fired.len() + edges.never_triggered.len(),
            "unused edge",
        ));
    }
    println!("{}", summary.join(", "));
    Ok(if violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn bisim(file: &Path, bound: usize) -> Outcome {
    let input = load_input(file)?;
    let a = &input.primary;
    let b = input.comparand.as_ref().ok_or_else(|| {
        Failure(format!(
            "{}: expected two models separated by `~`",
            file.display()
        ))
    })?;
    let (la, lb) = (expand(a, Some(bound)), expand(b, Some(bound)));
    if la.truncated || lb.truncated {
        return Err(Failure(format!(
            "expansion exceeded {bound} states; raise --max-states to decide bisimilarity"
        )));
    }
    match bisimilar_lts(a, &la, b, &lb) {
        BisimResult::Bisimilar { relation } => {
            println!("bisimilar: {} ~ {}", a.name(), b.name());
            for (p, q) in &relation {
                println!("  {}  ~  {}", a.describe(p), b.describe(q));
            }
            Ok(ExitCode::SUCCESS)
        }
        BisimResult::NotBisimilar(cx) => {
            let (only, name) = match cx.available_in {
                rgraph::products::Side::Left => ("left", a.name()),
                rgraph::products::Side::Right => ("right", b.name()),
            };
            println!("not bisimilar: {} ~ {}", a.name(), b.name());
            println!("  left:  {}", cx.left.describe(a));
            println!("  right: {}", cx.right.describe(b));
            println!(
                "  then `{}` is possible only on the {only} ({name})",
                cx.action
            );
            Ok(ExitCode::from(1))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn product(
    left: &Path,
    right: &Path,
    intrusions: Option<&Path>,
    mode: Mode,
    expand_it: bool,
    format: Option<Format>,
    bound: usize,
) -> Outcome {
    let (l, r) = (load_model(left)?, load_model(right)?);
    let spec = match intrusions {
        None => IntrusionSpec::empty(),
        Some(path) => {
            let src = read(path)?;
            let raw = parse_intrusions(&src).map_err(|d| diagnostics(path, &src, &d))?;
            IntrusionSpec::resolve(&raw, &l, &r).map_err(|errs| {
                Failure(
                    errs.iter()
                        .map(|e| format!("{}: {e}", path.display()))
                        .collect::<Vec<_>>()
                        .join("\n"),
                )
            })?
        }
    };
    let mode = match mode {
        Mode::Async => ProductMode::Async,
        Mode::Sync => ProductMode::Sync,
    };
    let p = ProductSystem::new(l, r, spec, mode).map_err(|e| Failure(e.to_string()))?;
    if !expand_it {
        let init = p.initial();
        println!(
            "{} | {}",
            p.left.describe(&init.left),
            p.right.describe(&init.right)
        );
        let moves = p.enabled(&init);
        if moves.is_empty() {
            println!("no enabled transitions");
        }
        for (i, m) in moves.iter().enumerate() {
            println!("  {}) {}", i + 1, p.describe_move(m));
        }
        return Ok(ExitCode::SUCCESS);
    }
    let lts = p.expand(Some(bound));
    warn_truncated(lts.truncated, bound);
    match format.map(Format::diagram) {
        None => println!(
            "{} || {}: {}, {}",
            p.left.name(),
            p.right.name(),
            plural(lts.node_count(), "state"),
            plural(lts.transition_count(), "transition")
        ),
        Some(None) => println!(
            "{}",
            serde_json::to_string_pretty(&product_lts_json(&p, &lts)).expect("values serialize")
        ),
        Some(Some(f)) => print!("{}", product_lts_diagram(&p, &lts, f)),
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(port: Option<u16>) -> Outcome {
    let Some(port) = port else {
        Session::new().serve(io::stdin().lock(), io::stdout().lock())?;
        return Ok(ExitCode::SUCCESS);
    };
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    eprintln!("listening on {}", listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = stream?;
        thread::spawn(move || {
            let reader = BufReader::new(match stream.try_clone() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("connection error: {e}");
                    return;
                }
            });
            if let Err(e) = Session::new().serve(reader, stream) {
                eprintln!("connection error: {e}");
            }
        });
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { file } => check(&file),
        Command::Lts {
            file,
            bound,
            format,
        } => lts(&file, bound.max_states, format),
        Command::Stats { file, bound } => print_stats(&file, bound.max_states),
        Command::Analyze {
            file,
            deadlocks,
            conflicts,
            unreachable,
            bound,
        } => analyze(&file, deadlocks, conflicts, unreachable, bound.max_states),
        Command::Bisim { file, bound } => bisim(&file, bound.max_states),
        Command::Step { file } => {
            let g = load_model(&file)?;
            repl::run(&g, io::stdin().lock(), io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Product {
            left,
            right,
            intrusions,
            mode,
            expand,
            format,
            bound,
        } => product(
            &left,
            &right,
            intrusions.as_deref(),
            mode,
            expand,
            format,
            bound.max_states,
        ),
        Command::Serve { stdio: _, port } => serve(port),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = io::stdout().flush();
            eprintln!("{message}");
            ExitCode::from(2)
        }
    }
}
