use std::collections::{BTreeSet, HashMap};

use parking_lot::RwLock;

use crate::lattice::{LatticeDescriptor, Value};
use crate::planner::IndexPlan;

/// Result of joining a value into the store.
#[derive(Debug, PartialEq)]
pub enum Joined {
    Unchanged,
    /// The stored value strictly grew to this.
    Updated(Vec<Value>),
}

#[derive(Debug)]
struct Row {
    key: Vec<Value>,
    value: Vec<Value>,
}

pub(crate) type Fetched = Vec<(Vec<Value>, Vec<Value>)>;

/// One relation: rows are append-only and keys never move, so secondary
/// indexes are written once per key.
#[derive(Debug)]
pub struct RelationStore {
    lattices: Vec<LatticeDescriptor>,
    bottom: Vec<Value>,
    rows: Vec<Row>,
    primary: HashMap<Vec<Value>, usize>,
    ordered: Vec<(Vec<usize>, BTreeSet<(Vec<Value>, usize)>)>,
    members: Vec<(usize, HashMap<Value, Vec<usize>>)>,
}

fn join_tuple(lattices: &[LatticeDescriptor], a: &[Value], b: &[Value]) -> Vec<Value> {
    lattices
        .iter()
        .zip(a.iter().zip(b))
        .map(|(l, (x, y))| l.join(x, y).expect("values were type checked"))
        .collect()
}

pub(crate) fn leq_tuple(lattices: &[LatticeDescriptor], a: &[Value], b: &[Value]) -> bool {
    lattices
        .iter()
        .zip(a.iter().zip(b))
        .all(|(l, (x, y))| l.leq(x, y).expect("values were type checked"))
}

impl RelationStore {
    fn new(lattices: Vec<LatticeDescriptor>, ordered: &[Vec<usize>], members: &[usize]) -> Self {
        RelationStore {
            bottom: lattices.iter().map(|l| l.bottom()).collect(),
            lattices,
            rows: Vec::new(),
            primary: HashMap::new(),
            ordered: ordered.iter().map(|c| (c.clone(), BTreeSet::new())).collect(),
            members: members.iter().map(|&c| (c, HashMap::new())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &[Value]) -> Option<&[Value]> {
        self.primary.get(key).map(|&r| self.rows[r].value.as_slice())
    }

    /// Whether `value` adds nothing to what is stored under `key`.
    pub fn subsumes(&self, key: &[Value], value: &[Value]) -> bool {
        match self.get(key) {
            Some(old) => leq_tuple(&self.lattices, value, old),
            None => leq_tuple(&self.lattices, value, &self.bottom),
        }
    }

    pub fn join(&mut self, key: &[Value], value: &[Value]) -> Joined {
        if let Some(&r) = self.primary.get(key) {
            let old = &self.rows[r].value;
            if leq_tuple(&self.lattices, value, old) {
                return Joined::Unchanged;
            }
            let new = join_tuple(&self.lattices, old, value);
            self.rows[r].value = new.clone();
            return Joined::Updated(new);
        }
        if leq_tuple(&self.lattices, value, &self.bottom) {
            return Joined::Unchanged;
        }
        let new = join_tuple(&self.lattices, &self.bottom, value);
        let r = self.rows.len();
        for (cols, set) in &mut self.ordered {
            set.insert((cols.iter().map(|&c| key[c].clone()).collect(), r));
        }
        for (col, map) in &mut self.members {
            if let Value::Set(s) = &key[*col] {
                for x in s.items() {
                    map.entry(x.clone()).or_default().push(r);
                }
            }
        }
        self.primary.insert(key.to_vec(), r);
        self.rows.push(Row {
            key: key.to_vec(),
            value: new.clone(),
        });
        Joined::Updated(new)
    }

    fn fetch(&self, r: usize) -> (Vec<Value>, Vec<Value>) {
        (self.rows[r].key.clone(), self.rows[r].value.clone())
    }

    pub(crate) fn scan(&self) -> Fetched {
        (0..self.rows.len()).map(|r| self.fetch(r)).collect()
    }

    pub(crate) fn lookup_primary(&self, key: &[Value]) -> Fetched {
        self.primary.get(key).map(|&r| self.fetch(r)).into_iter().collect()
    }

    pub(crate) fn lookup_prefix(&self, index: usize, prefix: Vec<Value>) -> Fetched {
        let set = &self.ordered[index].1;
        let n = prefix.len();
        let start = (prefix, 0usize);
        set.range(&start..)
            .take_while(|(vals, _)| vals[..n] == start.0[..])
            .map(|&(_, r)| self.fetch(r))
            .collect()
    }

    pub(crate) fn lookup_member(&self, member: usize, elem: &Value) -> Fetched {
        self.members[member]
            .1
            .get(elem)
            .map(|rows| rows.iter().map(|&r| self.fetch(r)).collect())
            .unwrap_or_default()
    }

    /// Every (key, value) pair sorted by key.
    pub fn sorted(&self) -> Fetched {
        let mut out = self.scan();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// All relations, each behind its own lock. No caller holds two locks at once.
#[derive(Debug)]
pub struct FactsDB {
    relations: Vec<RwLock<RelationStore>>,
}

impl FactsDB {
    pub fn new(value_lattices: Vec<Vec<LatticeDescriptor>>, plan: &IndexPlan) -> Self {
        FactsDB {
            relations: value_lattices
                .into_iter()
                .zip(&plan.relations)
                .map(|(l, ix)| RwLock::new(RelationStore::new(l, &ix.ordered, &ix.members)))
                .collect(),
        }
    }

    pub fn relation(&self, r: usize) -> &RwLock<RelationStore> {
        &self.relations[r]
    }

    pub fn subsumes(&self, r: usize, key: &[Value], value: &[Value]) -> bool {
        self.relations[r].read().subsumes(key, value)
    }

    pub fn join(&self, r: usize, key: &[Value], value: &[Value]) -> Joined {
        self.relations[r].write().join(key, value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_builtin;
    use crate::planner::RelationIndexes;

    fn store() -> RelationStore {
        RelationStore::new(vec![make_builtin("MinDist", &[]).unwrap()], &[vec![1, 0]], &[])
    }

    #[test]
    fn join_only_ascends() {
        let mut s = store();
        let k = vec![Value::sym("a"), Value::sym("b")];
        assert_eq!(s.join(&k, &[Value::nat(5)]), Joined::Updated(vec![Value::nat(5)]));
        assert_eq!(s.join(&k, &[Value::nat(9)]), Joined::Unchanged);
        assert_eq!(s.join(&k, &[Value::nat(3)]), Joined::Updated(vec![Value::nat(3)]));
        assert!(s.subsumes(&k, &[Value::nat(3)]));
        assert!(!s.subsumes(&k, &[Value::nat(2)]));
    }

    #[test]
    fn bottom_is_never_stored() {
        let mut s = store();
        let k = vec![Value::sym("a"), Value::sym("b")];
        assert_eq!(s.join(&k, &[Value::inf()]), Joined::Unchanged);
        assert!(s.is_empty());
        assert!(s.subsumes(&k, &[Value::inf()]));
    }

    #[test]
    fn prefix_lookup() {
        let mut s = store();
        for (a, b) in [("a", "x"), ("b", "x"), ("a", "y"), ("c", "xx")] {
            s.join(&[Value::sym(a), Value::sym(b)], &[Value::nat(1)]);
        }
        let got: Vec<Vec<Value>> = s.lookup_prefix(0, vec![Value::sym("x")]).into_iter().map(|r| r.0).collect();
        assert_eq!(
            got,
            vec![vec![Value::sym("a"), Value::sym("x")], vec![Value::sym("b"), Value::sym("x")]]
        );
    }

    #[test]
    fn membership_lookup() {
        let plan = IndexPlan {
            relations: vec![RelationIndexes {
                primary: vec![0, 1],
                ordered: vec![],
                members: vec![1],
            }],
        };
        let db = FactsDB::new(vec![vec![LatticeDescriptor::bool()]], &plan);
        let set = Value::set([Value::sym("p"), Value::sym("q")]);
        db.join(0, &[Value::sym("s"), set], &[Value::Bool(true)]);
        let st = db.relation(0).read();
        assert_eq!(st.lookup_member(0, &Value::sym("q")).len(), 1);
        assert!(st.lookup_member(0, &Value::sym("r")).is_empty());
    }
}
