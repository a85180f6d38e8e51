//! Ground values and their value types.

use std::fmt;
use std::sync::Arc;

use serde_json::Value as Json;

use super::partition::Partition;
use super::LatticeError;

/// An interned-by-sharing symbol. Ordering is lexicographic on the text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(text: impl AsRef<str>) -> Self {
        Symbol(Arc::from(text.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A natural number or infinity. `Inf` compares above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    /// Addition that saturates to `Inf` on overflow.
    pub fn saturating_add(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_add(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

/// A canonical finite set: sorted, duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteSet(Vec<Value>);

impl FiniteSet {
    pub fn new(items: impl IntoIterator<Item = Value>) -> Self {
        let mut items: Vec<Value> = items.into_iter().collect();
        items.sort();
        items.dedup();
        FiniteSet(items)
    }

    pub fn empty() -> Self {
        FiniteSet(Vec::new())
    }

    pub fn items(&self) -> &[Value] {
        &self.0
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.0.binary_search(v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        FiniteSet(out)
    }

    pub fn intersection(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet(self.0.iter().filter(|v| other.contains(v)).cloned().collect())
    }
}

/// A ground value.
///
/// The derived `Ord` is the canonical order used for output and for sorting
/// set members; it is unrelated to any lattice order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Nat(ExtNat),
    Sym(Symbol),
    Tuple(Vec<Value>),
    Set(FiniteSet),
    Partition(Partition),
}

impl Value {
    pub fn sym(s: impl AsRef<str>) -> Value {
        Value::Sym(Symbol::new(s))
    }

    pub fn nat(n: u64) -> Value {
        Value::Nat(ExtNat::Fin(n))
    }

    pub fn inf() -> Value {
        Value::Nat(ExtNat::Inf)
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Set(FiniteSet::new(items))
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&FiniteSet> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Nat(_) => "nat",
            Value::Sym(_) => "symbol",
            Value::Tuple(_) => "tuple",
            Value::Set(_) => "set",
            Value::Partition(_) => "partition",
        }
    }

    /// Whether this value inhabits `ty`. Opaque symbol types accept any symbol.
    pub fn has_type(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (Value::Bool(_), Ty::Bool) => true,
            (Value::Int(_), Ty::Int) => true,
            (Value::Nat(_), Ty::Nat) => true,
            (Value::Sym(_), Ty::Opaque(_)) => true,
            (Value::Tuple(items), Ty::Tuple(tys)) => {
                items.len() == tys.len() && items.iter().zip(tys).all(|(v, t)| v.has_type(t))
            }
            (Value::Set(s), Ty::Set(elem)) => s.items().iter().all(|v| v.has_type(elem)),
            (Value::Partition(_), Ty::Partition(elem)) => matches!(**elem, Ty::Opaque(_)),
            _ => false,
        }
    }

    /// Canonical JSON form: symbols as strings, infinity as `"inf"`,
    /// sets and partitions as sorted arrays.
    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => Json::from(*i),
            Value::Nat(ExtNat::Fin(n)) => Json::from(*n),
            Value::Nat(ExtNat::Inf) => Json::String("inf".into()),
            Value::Sym(s) => Json::String(s.as_str().to_owned()),
            Value::Tuple(items) => Json::Array(items.iter().map(Value::to_json).collect()),
            Value::Set(s) => Json::Array(s.items().iter().map(Value::to_json).collect()),
            Value::Partition(p) => Json::Array(
                p.blocks()
                    .iter()
                    .map(|b| Json::Array(b.iter().map(|s| Json::String(s.as_str().to_owned())).collect()))
                    .collect(),
            ),
        }
    }

    /// Decodes a JSON value guided by the expected type.
    pub fn from_json(ty: &Ty, json: &Json) -> Result<Value, LatticeError> {
        let mismatch = || LatticeError::Decode {
            expected: ty.to_string(),
            found: json.to_string(),
        };
        match ty {
            Ty::Bool => json.as_bool().map(Value::Bool).ok_or_else(mismatch),
            Ty::Int => json.as_i64().map(Value::Int).ok_or_else(mismatch),
            Ty::Nat => match json {
                Json::String(s) if s == "inf" => Ok(Value::inf()),
                _ => json.as_u64().map(Value::nat).ok_or_else(mismatch),
            },
            Ty::Opaque(_) => json.as_str().map(Value::sym).ok_or_else(mismatch),
            Ty::Tuple(tys) => {
                let items = json.as_array().ok_or_else(mismatch)?;
                if items.len() != tys.len() {
                    return Err(mismatch());
                }
                items
                    .iter()
                    .zip(tys)
                    .map(|(j, t)| Value::from_json(t, j))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::Tuple)
            }
            Ty::Set(elem) => {
                let items = json.as_array().ok_or_else(mismatch)?;
                items
                    .iter()
                    .map(|j| Value::from_json(elem, j))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Value::set)
            }
            Ty::Partition(_) => {
                let blocks = json.as_array().ok_or_else(mismatch)?;
                let mut out = Vec::with_capacity(blocks.len());
                for b in blocks {
                    let members = b.as_array().ok_or_else(mismatch)?;
                    let block = members
                        .iter()
                        .map(|m| m.as_str().map(Symbol::new).ok_or_else(mismatch))
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push(block);
                }
                Partition::new(out).map(Value::Partition)
            }
        }
    }

    /// Canonical serialized text; equal values serialize to equal bytes.
    pub fn canonical_string(&self) -> String {
        self.to_json().to_string()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// Value types. `Opaque` types are nominal symbol types such as `Vertex`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int,
    Nat,
    Opaque(Arc<str>),
    Tuple(Vec<Ty>),
    Set(Box<Ty>),
    Partition(Box<Ty>),
}

impl Ty {
    pub fn opaque(name: &str) -> Ty {
        Ty::Opaque(Arc::from(name))
    }

    pub fn supports_add(&self) -> bool {
        matches!(self, Ty::Int | Ty::Nat)
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => f.write_str("Bool"),
            Ty::Int => f.write_str("Int"),
            Ty::Nat => f.write_str("Nat"),
            Ty::Opaque(n) => f.write_str(n),
            Ty::Tuple(items) => {
                f.write_str("Tuple(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Ty::Set(t) => write!(f, "Set({t})"),
            Ty::Partition(t) => write!(f, "Partition({t})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_is_above_every_finite() {
        assert!(ExtNat::Inf > ExtNat::Fin(u64::MAX));
        assert_eq!(ExtNat::Fin(u64::MAX).saturating_add(ExtNat::Fin(1)), ExtNat::Inf);
        assert_eq!(ExtNat::Inf.saturating_add(ExtNat::Fin(3)), ExtNat::Inf);
        assert_eq!(ExtNat::Fin(2).saturating_add(ExtNat::Fin(3)), ExtNat::Fin(5));
    }

    #[test]
    fn sets_are_canonical() {
        let a = Value::set([Value::sym("b"), Value::sym("a"), Value::sym("b")]);
        let b = Value::set([Value::sym("a"), Value::sym("b")]);
        assert_eq!(a, b);
        assert_eq!(a.canonical_string(), r#"["a","b"]"#);
    }

    #[test]
    fn json_decoding_is_type_directed() {
        let j: Json = serde_json::json!("inf");
        assert_eq!(Value::from_json(&Ty::Nat, &j).unwrap(), Value::inf());
        assert_eq!(Value::from_json(&Ty::opaque("V"), &j).unwrap(), Value::sym("inf"));
        let s = serde_json::json!(["q", "p"]);
        let v = Value::from_json(&Ty::Set(Box::new(Ty::opaque("State"))), &s).unwrap();
        assert_eq!(v.canonical_string(), r#"["p","q"]"#);
        assert!(Value::from_json(&Ty::Int, &serde_json::json!("x")).is_err());
    }
}
