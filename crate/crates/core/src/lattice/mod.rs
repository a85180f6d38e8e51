//! Ground values, lattice descriptors and the built-in lattices.

mod descriptor;
mod partition;
mod value;

use thiserror::Error;

pub use descriptor::{make_builtin, LatticeDescriptor, LatticeKind, LatticeParam};
pub use partition::Partition;
pub use value::{ExtNat, FiniteSet, Symbol, Ty, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("value {value} is not in the carrier of lattice {lattice}")]
    CarrierMismatch { lattice: String, value: String },
    #[error("unknown lattice `{0}`")]
    UnknownLattice(String),
    #[error("bad parameters for lattice {lattice}: {detail}")]
    BadParams { lattice: String, detail: String },
    #[error("cannot reverse lattice {0}: it has no top element")]
    DualUnsupported(String),
    #[error("symbol {0} appears in more than one partition block")]
    OverlappingBlocks(String),
    #[error("not-distinguished is not transitive: {a} ~ {b} and {b} ~ {c}, but {a} and {c} are distinguished")]
    NotTransitive { a: String, b: String, c: String },
    #[error("expected a value of type {expected}, found {found}")]
    Decode { expected: String, found: String },
}

/// Least upper bound of `a` and `b` in `desc`.
pub fn join(desc: &LatticeDescriptor, a: &Value, b: &Value) -> Result<Value, LatticeError> {
    desc.join(a, b)
}

pub fn leq(desc: &LatticeDescriptor, a: &Value, b: &Value) -> Result<bool, LatticeError> {
    desc.leq(a, b)
}

pub fn bottom(desc: &LatticeDescriptor) -> Value {
    desc.bottom()
}

/// True iff `x` and `y` lie in different blocks of partition `p`.
pub fn partition_separated(p: &Value, x: &Symbol, y: &Symbol) -> bool {
    match p {
        Value::Partition(p) => p.separated(x, y),
        _ => false,
    }
}

/// Turns a fixpoint set of distinguished pairs into the partition of
/// `universe` into undistinguished classes.
pub fn partition_from_undistinguished_pairs(
    universe: &std::collections::BTreeSet<Symbol>,
    distinguished: &std::collections::BTreeSet<(Symbol, Symbol)>,
) -> Result<Value, LatticeError> {
    Partition::from_undistinguished_pairs(universe, distinguished).map(Value::Partition)
}
