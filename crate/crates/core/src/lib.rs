//! Multi-action reactive graphs.
//!
//! A reactive graph is a labelled transition system whose edges can be active
//! or inactive. Hyper edges, whose endpoints are themselves edges, switch other
//! edges on or off whenever their source is fired. This crate provides the
//! data model, the step semantics, expansion into an explicit LTS, verification
//! analyses, products of two graphs, a textual notation, export formats and a
//! JSON session protocol.

pub mod analysis;
pub mod dsl;
pub mod edgeset;
pub mod expansion;
pub mod export;
pub mod fixtures;
pub mod model;
pub mod products;
pub mod semantics;
pub mod session;

pub use edgeset::EdgeSet;
pub use expansion::{expand, stats, InducedLts, SizeStats, DEFAULT_MAX_STATES};
pub use model::{
    validate, EdgeDetail, EdgeIx, ModelError, Polarity, ReactiveGraph, StateIx, ValidatedGraph,
};
pub use semantics::{Configuration, Move, SemanticsError, StepEffect};
