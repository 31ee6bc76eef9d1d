//! Bundled example models.
//!
//! Each model ships as DSL source under `models/`. The vending machine, its
//! unfolded LTS, and the user component are also available as programmatic
//! constructions so that tests can cross-check the parser against them.

use crate::model::{Polarity, ReactiveGraph};

pub const VENDING: &str = include_str!("../models/vending.rg");
pub const VENDING_LTS: &str = include_str!("../models/vending_lts.rg");
pub const VENDING_BISIM: &str = include_str!("../models/vending_bisim.rg");
pub const VENDING_NO_H5: &str = include_str!("../models/vending_no_h5.rg");
pub const FTS: &str = include_str!("../models/fts.rg");
pub const USER: &str = include_str!("../models/user.rg");
pub const USER_VM_INTRUSIONS: &str = include_str!("../models/user_vm.ri");
pub const BROKEN: &str = include_str!("../models/broken.rg");

/// `(name, source)` for every bundled model that parses.
pub const CATALOGUE: &[(&str, &str)] = &[
    ("vending machine", VENDING),
    ("vending machine lts", VENDING_LTS),
    ("vending machine ~ lts", VENDING_BISIM),
    (
        "vending machine without h5 ~ vending machine",
        VENDING_NO_H5,
    ),
    ("featured transition system", FTS),
    ("user", USER),
];

/// Vending machine accepting at most one euro.
pub fn vending_machine() -> ReactiveGraph {
    ReactiveGraph::new("VM", "Insert")
        .ground("e1", "Insert", "1eur", "Chocolate")
        .ground("e2", "Insert", "0.5eur", "Coffee")
        .ground("e3", "Chocolate", "get-chocolate", "Insert")
        .ground("e4", "Coffee", "get-coffee", "Insert")
        .hyper("h1", "e1", Polarity::Off, "e1")
        .hyper("h2", "e1", Polarity::Off, "e2")
        .hyper("h3", "e2", Polarity::Off, "e1")
        .hyper("h4", "e2", Polarity::Off, "e2")
        .hyper("h5", "e2", Polarity::On, "h4")
        .inactive("h4")
}

/// The vending machine with the re-enabling hyper edge `h5` removed.
pub fn vending_without_h5() -> ReactiveGraph {
    let mut g = vending_machine();
    g.name = "VMNoH5".to_string();
    g.edges.remove("h5");
    g.active.remove("h5");
    g
}

/// The seven-state LTS of the vending machine, written without hyper edges.
pub fn vending_lts() -> ReactiveGraph {
    ReactiveGraph::new("VMLts", "Insert0")
        .ground("t1", "Insert0", "1eur", "Chocolate")
        .ground("t2", "Chocolate", "get-chocolate", "Insert1")
        .ground("t3", "Insert0", "0.5eur", "Coffee1")
        .ground("t4", "Coffee1", "get-coffee", "Insert2")
        .ground("t5", "Insert2", "0.5eur", "Coffee2")
        .ground("t6", "Coffee2", "get-coffee", "Insert3")
}

/// User that inserts a coin and collects a product.
pub fn user() -> ReactiveGraph {
    ReactiveGraph::new("Usr", "User")
        .ground("coin", "User", "coin", "Select")
        .ground("get", "Select", "get-product", "User")
}
