//! Lattice descriptors for the built-in lattices and their combinators.

use std::fmt;

use super::partition::Partition;
use super::value::{FiniteSet, Ty, Value};
use super::LatticeError;

/// The structure of a lattice. Operations dispatch on this.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// Extended naturals where smaller is greater; bottom is ∞, join is min.
    MinDist,
    /// Extended naturals in the usual order; bottom is 0, join is max.
    MaxNat,
    /// Booleans with false below true; join is disjunction.
    Bool,
    /// Finite sets of the element type under inclusion.
    Set(Ty),
    /// Partitions of symbols under refinement, finer being greater.
    Partition(Ty),
    /// The order-reversed lattice.
    Dual(Box<LatticeKind>),
    /// Componentwise product.
    Product(Vec<LatticeKind>),
}

/// A parameter passed to [`make_builtin`].
#[derive(Clone, Debug)]
pub enum LatticeParam {
    Type(Ty),
    Lattice(LatticeDescriptor),
}

/// A named lattice. Immutable once built and cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeDescriptor {
    pub name: String,
    pub kind: LatticeKind,
}

impl LatticeDescriptor {
    pub fn new(name: impl Into<String>, kind: LatticeKind) -> Self {
        LatticeDescriptor { name: name.into(), kind }
    }

    pub fn bool() -> Self {
        LatticeDescriptor::new("Bool", LatticeKind::Bool)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        LatticeDescriptor { name: name.into(), kind: self.kind.clone() }
    }

    pub fn carrier(&self) -> Ty {
        self.kind.carrier()
    }

    pub fn bottom(&self) -> Value {
        self.kind.bottom()
    }

    pub fn top(&self) -> Option<Value> {
        self.kind.top()
    }

    pub fn join(&self, a: &Value, b: &Value) -> Result<Value, LatticeError> {
        self.kind.join(a, b)
    }

    pub fn meet(&self, a: &Value, b: &Value) -> Result<Value, LatticeError> {
        self.kind.meet(a, b)
    }

    pub fn leq(&self, a: &Value, b: &Value) -> Result<bool, LatticeError> {
        self.kind.leq(a, b)
    }

    pub fn contains(&self, v: &Value) -> bool {
        v.has_type(&self.carrier())
    }
}

impl fmt::Display for LatticeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Builds a built-in lattice from its name and parameters.
pub fn make_builtin(name: &str, params: &[LatticeParam]) -> Result<LatticeDescriptor, LatticeError> {
    let arity = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(LatticeError::BadParams {
                lattice: name.to_owned(),
                detail: format!("expected {n} parameter(s), got {}", params.len()),
            })
        }
    };
    let type_param = |p: &LatticeParam| match p {
        LatticeParam::Type(t) => Ok(t.clone()),
        LatticeParam::Lattice(l) => Err(LatticeError::BadParams {
            lattice: name.to_owned(),
            detail: format!("expected a type, got lattice {}", l.name),
        }),
    };
    let lattice_param = |p: &LatticeParam| match p {
        LatticeParam::Lattice(l) => Ok(l.kind.clone()),
        LatticeParam::Type(t) => Err(LatticeError::BadParams {
            lattice: name.to_owned(),
            detail: format!("expected a lattice, got type {t}"),
        }),
    };
    let kind = match name {
        "MinDist" => {
            arity(0)?;
            LatticeKind::MinDist
        }
        "MaxNat" => {
            arity(0)?;
            LatticeKind::MaxNat
        }
        "Bool" => {
            arity(0)?;
            LatticeKind::Bool
        }
        "Set" => {
            arity(1)?;
            LatticeKind::Set(type_param(&params[0])?)
        }
        "Partition" => {
            arity(1)?;
            let elem = type_param(&params[0])?;
            if !matches!(elem, Ty::Opaque(_)) {
                return Err(LatticeError::BadParams {
                    lattice: name.to_owned(),
                    detail: format!("partitions range over symbol types, not {elem}"),
                });
            }
            LatticeKind::Partition(elem)
        }
        "Dual" => {
            arity(1)?;
            let inner = lattice_param(&params[0])?;
            // The dual's bottom is the inner top; every built-in has a meet.
            if inner.top().is_none() {
                return Err(LatticeError::DualUnsupported(inner.to_string()));
            }
            LatticeKind::Dual(Box::new(inner))
        }
        "Product" => {
            if params.is_empty() {
                return Err(LatticeError::BadParams {
                    lattice: name.to_owned(),
                    detail: "a product needs at least one component".into(),
                });
            }
            LatticeKind::Product(params.iter().map(lattice_param).collect::<Result<_, _>>()?)
        }
        other => return Err(LatticeError::UnknownLattice(other.to_owned())),
    };
    Ok(LatticeDescriptor::new(kind.to_string(), kind))
}

fn mismatch(kind: &LatticeKind, v: &Value) -> LatticeError {
    LatticeError::CarrierMismatch {
        lattice: kind.to_string(),
        value: v.to_string(),
    }
}

impl LatticeKind {
    pub fn carrier(&self) -> Ty {
        match self {
            LatticeKind::MinDist | LatticeKind::MaxNat => Ty::Nat,
            LatticeKind::Bool => Ty::Bool,
            LatticeKind::Set(t) => Ty::Set(Box::new(t.clone())),
            LatticeKind::Partition(t) => Ty::Partition(Box::new(t.clone())),
            LatticeKind::Dual(inner) => inner.carrier(),
            LatticeKind::Product(parts) => Ty::Tuple(parts.iter().map(LatticeKind::carrier).collect()),
        }
    }

    pub fn bottom(&self) -> Value {
        match self {
            LatticeKind::MinDist => Value::inf(),
            LatticeKind::MaxNat => Value::nat(0),
            LatticeKind::Bool => Value::Bool(false),
            LatticeKind::Set(_) => Value::Set(FiniteSet::empty()),
            LatticeKind::Partition(_) => Value::Partition(Partition::ambient()),
            LatticeKind::Dual(inner) => inner.top().expect("dual lattices are only built over lattices with a top"),
            LatticeKind::Product(parts) => Value::Tuple(parts.iter().map(LatticeKind::bottom).collect()),
        }
    }

    pub fn top(&self) -> Option<Value> {
        match self {
            LatticeKind::MinDist => Some(Value::nat(0)),
            LatticeKind::MaxNat => Some(Value::inf()),
            LatticeKind::Bool => Some(Value::Bool(true)),
            LatticeKind::Set(_) | LatticeKind::Partition(_) => None,
            LatticeKind::Dual(inner) => Some(inner.bottom()),
            LatticeKind::Product(parts) => parts.iter().map(LatticeKind::top).collect::<Option<Vec<_>>>().map(Value::Tuple),
        }
    }

    pub fn join(&self, a: &Value, b: &Value) -> Result<Value, LatticeError> {
        match (self, a, b) {
            (LatticeKind::MinDist, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(*x.min(y))),
            (LatticeKind::MaxNat, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(*x.max(y))),
            (LatticeKind::Bool, Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(*x || *y)),
            (LatticeKind::Set(_), Value::Set(x), Value::Set(y)) => Ok(Value::Set(x.union(y))),
            (LatticeKind::Partition(_), Value::Partition(x), Value::Partition(y)) => Ok(Value::Partition(x.refine(y))),
            (LatticeKind::Dual(inner), _, _) => inner.meet(a, b),
            (LatticeKind::Product(parts), Value::Tuple(xs), Value::Tuple(ys))
                if xs.len() == parts.len() && ys.len() == parts.len() =>
            {
                parts
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(l, (x, y))| l.join(x, y))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::Tuple)
            }
            _ => Err(mismatch(self, if self.carrier_ok(a) { b } else { a })),
        }
    }

    pub fn meet(&self, a: &Value, b: &Value) -> Result<Value, LatticeError> {
        match (self, a, b) {
            (LatticeKind::MinDist, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(*x.max(y))),
            (LatticeKind::MaxNat, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(*x.min(y))),
            (LatticeKind::Bool, Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(*x && *y)),
            (LatticeKind::Set(_), Value::Set(x), Value::Set(y)) => Ok(Value::Set(x.intersection(y))),
            (LatticeKind::Partition(_), Value::Partition(x), Value::Partition(y)) => Ok(Value::Partition(x.coarsen(y))),
            (LatticeKind::Dual(inner), _, _) => inner.join(a, b),
            (LatticeKind::Product(parts), Value::Tuple(xs), Value::Tuple(ys))
                if xs.len() == parts.len() && ys.len() == parts.len() =>
            {
                parts
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(l, (x, y))| l.meet(x, y))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::Tuple)
            }
            _ => Err(mismatch(self, if self.carrier_ok(a) { b } else { a })),
        }
    }

    pub fn leq(&self, a: &Value, b: &Value) -> Result<bool, LatticeError> {
        match (self, a, b) {
            (LatticeKind::MinDist, Value::Nat(x), Value::Nat(y)) => Ok(x >= y),
            (LatticeKind::MaxNat, Value::Nat(x), Value::Nat(y)) => Ok(x <= y),
            (LatticeKind::Bool, Value::Bool(x), Value::Bool(y)) => Ok(!*x || *y),
            (LatticeKind::Set(_), Value::Set(x), Value::Set(y)) => Ok(x.is_subset(y)),
            (LatticeKind::Partition(_), Value::Partition(x), Value::Partition(y)) => Ok(x.leq(y)),
            (LatticeKind::Dual(inner), _, _) => inner.leq(b, a),
            (LatticeKind::Product(parts), Value::Tuple(xs), Value::Tuple(ys))
                if xs.len() == parts.len() && ys.len() == parts.len() =>
            {
                for (l, (x, y)) in parts.iter().zip(xs.iter().zip(ys)) {
                    if !l.leq(x, y)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Err(mismatch(self, if self.carrier_ok(a) { b } else { a })),
        }
    }

    fn carrier_ok(&self, v: &Value) -> bool {
        v.has_type(&self.carrier())
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeKind::MinDist => f.write_str("MinDist"),
            LatticeKind::MaxNat => f.write_str("MaxNat"),
            LatticeKind::Bool => f.write_str("Bool"),
            LatticeKind::Set(t) => write!(f, "Set({t})"),
            LatticeKind::Partition(t) => write!(f, "Partition({t})"),
            LatticeKind::Dual(inner) => write!(f, "Dual({inner})"),
            LatticeKind::Product(parts) => {
                f.write_str("Product(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin(name: &str) -> LatticeDescriptor {
        make_builtin(name, &[]).unwrap()
    }

    fn set_of(xs: &[&str]) -> Value {
        Value::set(xs.iter().map(Value::sym))
    }

    #[test]
    fn min_dist_join_and_leq() {
        let d = builtin("MinDist");
        assert_eq!(d.join(&Value::nat(3), &Value::nat(5)).unwrap(), Value::nat(3));
        assert_eq!(d.join(&Value::inf(), &Value::nat(7)).unwrap(), Value::nat(7));
        assert!(d.leq(&Value::inf(), &Value::nat(7)).unwrap());
        assert!(!d.leq(&Value::nat(3), &Value::nat(5)).unwrap());
        assert_eq!(d.bottom(), Value::inf());
    }

    #[test]
    fn set_join_and_leq() {
        let s = make_builtin("Set", &[LatticeParam::Type(Ty::opaque("V"))]).unwrap();
        assert_eq!(s.join(&set_of(&["a", "b"]), &set_of(&["b", "c"])).unwrap(), set_of(&["a", "b", "c"]));
        assert!(s.leq(&set_of(&["a"]), &set_of(&["a", "b"])).unwrap());
        assert_eq!(s.bottom(), set_of(&[]));
    }

    #[test]
    fn partition_bottom_is_ambient() {
        let p = make_builtin("Partition", &[LatticeParam::Type(Ty::opaque("State"))]).unwrap();
        assert_eq!(p.bottom(), Value::Partition(Partition::ambient()));
    }

    #[test]
    fn dual_and_product() {
        let max = builtin("MaxNat");
        let dual = make_builtin("Dual", &[LatticeParam::Lattice(max)]).unwrap();
        assert!(dual.leq(&Value::nat(5), &Value::nat(3)).unwrap());
        let set = make_builtin("Set", &[LatticeParam::Type(Ty::opaque("V"))]).unwrap();
        let prod = make_builtin(
            "Product",
            &[LatticeParam::Lattice(builtin("MinDist")), LatticeParam::Lattice(set)],
        )
        .unwrap();
        assert_eq!(prod.bottom(), Value::Tuple(vec![Value::inf(), set_of(&[])]));
        let b = builtin("Bool");
        assert_eq!(b.join(&Value::Bool(false), &Value::Bool(true)).unwrap(), Value::Bool(true));
    }

    #[test]
    fn errors() {
        assert!(matches!(make_builtin("Nope", &[]), Err(LatticeError::UnknownLattice(_))));
        let set = make_builtin("Set", &[LatticeParam::Type(Ty::opaque("V"))]).unwrap();
        assert!(matches!(
            make_builtin("Dual", &[LatticeParam::Lattice(set)]),
            Err(LatticeError::DualUnsupported(_))
        ));
        let d = builtin("MinDist");
        assert!(matches!(
            d.join(&Value::nat(1), &Value::sym("x")),
            Err(LatticeError::CarrierMismatch { .. })
        ));
    }
}
