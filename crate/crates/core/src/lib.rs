//! An embeddable least-fixed-point solver over lattice-valued relations.
//!
//! Programs declare types, lattices, relations, inference rules and ordering
//! directives. [`lang`] parses and validates them, [`planner`] compiles rules
//! into semi-naive delta variants with join orders and indexes, and [`engine`]
//! runs a priority work queue to the least fixed point.

pub mod lattice;
pub mod lang;
pub mod planner;
pub mod engine;
pub mod corpus;
