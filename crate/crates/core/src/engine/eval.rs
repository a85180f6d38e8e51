//! Rule-body evaluation against the facts database.

use std::cmp::Reverse;

use crate::lang::{Column, Direction, Relation, TAtom, TExpr, TPremise, TypedProgram};
use crate::lattice::{LatticeDescriptor, Value};
use crate::planner::{Lookup, Pivot, PrioritySpec, StepKind, Variant};

use super::db::{Fetched, FactsDB};
use super::queue::PriorityKey;

pub(crate) type Env = Vec<Option<Value>>;

pub(crate) struct Evaluator<'a> {
    pub program: &'a TypedProgram,
    pub consts: &'a [Value],
    pub db: &'a FactsDB,
}

pub(crate) fn eval(e: &TExpr, env: &Env, consts: &[Value]) -> Option<Value> {
    match e {
        TExpr::Var(v) => env[*v].clone(),
        TExpr::Value(x) => Some(x.clone()),
        TExpr::Const(c) => Some(consts[*c].clone()),
        TExpr::Add(l, r) => {
            let (l, r) = (eval(l, env, consts)?, eval(r, env, consts)?);
            Some(match (l, r) {
                (Value::Nat(a), Value::Nat(b)) => Value::Nat(a.saturating_add(b)),
                (Value::Int(a), Value::Int(b)) => Value::Int(a.saturating_add(b)),
                (a, b) => panic!("addition of {} and {}", a.kind_name(), b.kind_name()),
            })
        }
        TExpr::Wildcard => None,
    }
}

fn lattice_at<'r>(rel: &'r Relation, k: usize) -> &'r LatticeDescriptor {
    &rel.value_lattices[k]
}

/// Matches atom arguments against a stored fact, binding fresh variables.
/// Returns the variables it bound so the caller can undo them.
fn match_fact(rel: &Relation, args: &[TExpr], key: &[Value], value: &[Value], env: &mut Env, consts: &[Value]) -> Option<Vec<usize>> {
    let mut newly = Vec::new();
    for (i, arg) in args.iter().enumerate() {
        let (stored, lattice) = match rel.column(i) {
            Column::Key(k) => (&key[k], None),
            Column::Value(k) => (&value[k], Some(lattice_at(rel, k))),
        };
        let ok = match arg {
            TExpr::Wildcard => true,
            TExpr::Var(v) if env[*v].is_none() => {
                env[*v] = Some(stored.clone());
                newly.push(*v);
                true
            }
            e => match eval(e, env, consts) {
                None => false,
                Some(x) => match lattice {
                    None => &x == stored,
                    Some(l) => l.leq(&x, stored).unwrap_or(false),
                },
            },
        };
        if !ok {
            for v in newly {
                env[v] = None;
            }
            return None;
        }
    }
    Some(newly)
}

/// A derived head fact: relation, key, value.
pub(crate) type Derived = (usize, Vec<Value>, Vec<Value>);

impl Evaluator<'_> {
    fn relation(&self, r: usize) -> &Relation {
        &self.program.relations[r]
    }

    fn candidates(&self, atom: &TAtom, lookup: &Lookup, env: &Env, elem: Option<&Value>) -> Fetched {
        let rel = self.relation(atom.relation);
        let store = self.db.relation(atom.relation).read();
        let arg = |k: usize| eval(&atom.args[rel.key_cols[k]], env, self.consts).expect("lookup columns are bound");
        match lookup {
            Lookup::Delta => unreachable!("pivot is matched directly"),
            Lookup::Scan => store.scan(),
            Lookup::Primary => store.lookup_primary(&(0..rel.key_cols.len()).map(arg).collect::<Vec<_>>()),
            Lookup::Index { index, cols } => store.lookup_prefix(*index, cols.iter().map(|&k| arg(k)).collect()),
            Lookup::Member { member, .. } => match elem {
                Some(x) => store.lookup_member(*member, x),
                None => store.scan(),
            },
        }
    }

    fn forall_holds(&self, var: usize, collection: &TExpr, atom: &TAtom, env: &mut Env) -> bool {
        let Some(Value::Set(set)) = eval(collection, env, self.consts) else {
            return false;
        };
        let rel = self.relation(atom.relation);
        let saved = env[var].take();
        let mut ok = true;
        for x in set.items() {
            env[var] = Some(x.clone());
            let key: Option<Vec<Value>> = rel
                .key_cols
                .iter()
                .map(|&c| match &atom.args[c] {
                    TExpr::Var(v) if env[*v].is_none() => None,
                    e => eval(e, env, self.consts),
                })
                .collect();
            let rows = {
                let store = self.db.relation(atom.relation).read();
                match &key {
                    Some(k) => store.lookup_primary(k),
                    None => store.scan(),
                }
            };
            let found = rows.iter().any(|(k, v)| match match_fact(rel, &atom.args, k, v, env, self.consts) {
                Some(newly) => {
                    for n in newly {
                        env[n] = None;
                    }
                    true
                }
                None => false,
            });
            if !found {
                ok = false;
                break;
            }
        }
        env[var] = saved;
        ok
    }

    fn run(&self, v: &Variant, i: usize, env: &mut Env, elem: Option<&Value>, out: &mut Vec<Derived>) -> u64 {
        let rule = &self.program.rules[v.rule];
        let Some(step) = v.steps.get(i) else {
            for h in &v.heads {
                let key: Vec<Value> = h.key.iter().map(|e| eval(e, env, self.consts).expect("head bound")).collect();
                let value = if h.value.is_empty() {
                    vec![Value::Bool(true)]
                } else {
                    h.value.iter().map(|e| eval(e, env, self.consts).expect("head bound")).collect()
                };
                out.push((h.relation, key, value));
            }
            return 1;
        };
        let prem = &rule.premises[step.premise];
        match (&step.kind, prem) {
            (StepKind::Atom { lookup, .. }, TPremise::Atom(atom)) => {
                let rel = self.relation(atom.relation);
                let mut n = 0;
                for (k, val) in self.candidates(atom, lookup, env, elem) {
                    if let Some(newly) = match_fact(rel, &atom.args, &k, &val, env, self.consts) {
                        n += self.run(v, i + 1, env, elem, out);
                        for x in newly {
                            env[x] = None;
                        }
                    }
                }
                n
            }
            (StepKind::Constraint, TPremise::Constraint { op, lhs, rhs }) => {
                let l = eval(lhs, env, self.consts).expect("constraint bound");
                let r = eval(rhs, env, self.consts).expect("constraint bound");
                if op.holds(l.cmp(&r)) {
                    self.run(v, i + 1, env, elem, out)
                } else {
                    0
                }
            }
            (StepKind::Assign, TPremise::Assign { var, expr }) => {
                let x = eval(expr, env, self.consts).expect("assignment bound");
                match &env[*var] {
                    Some(old) if *old != x => 0,
                    Some(_) => self.run(v, i + 1, env, elem, out),
                    None => {
                        env[*var] = Some(x);
                        let n = self.run(v, i + 1, env, elem, out);
                        env[*var] = None;
                        n
                    }
                }
            }
            (StepKind::Forall, TPremise::Forall { var, collection, atom }) => {
                if self.forall_holds(*var, collection, atom, env) {
                    self.run(v, i + 1, env, elem, out)
                } else {
                    0
                }
            }
            (kind, _) => panic!("step {kind:?} does not match its premise"),
        }
    }

    /// Fires a delta variant on one fact. Returns the number of complete body
    /// satisfactions; derived facts are appended to `out`.
    pub fn fire_delta(&self, v: &Variant, key: &[Value], value: &[Value], out: &mut Vec<Derived>) -> u64 {
        let rule = &self.program.rules[v.rule];
        let mut env: Env = vec![None; v.slots];
        match v.pivot.expect("delta variant") {
            Pivot::Atom(pi) => {
                let TPremise::Atom(atom) = &rule.premises[pi] else { unreachable!() };
                let rel = self.relation(atom.relation);
                if match_fact(rel, &atom.args, key, value, &mut env, self.consts).is_none() {
                    return 0;
                }
                self.run(v, 1, &mut env, None, out)
            }
            Pivot::ForallInner(_) => {
                let StepKind::ForallPivot { elem_col, .. } = v.steps[0].kind else { unreachable!() };
                let elem = elem_col.map(|k| key[k].clone());
                if let Some(x) = &elem {
                    env[v.elem_slot()] = Some(x.clone());
                }
                self.run(v, 1, &mut env, elem.as_ref(), out)
            }
        }
    }

    /// Fires a full (pivot-free) variant against the whole database.
    pub fn fire_full(&self, v: &Variant, out: &mut Vec<Derived>) -> u64 {
        let mut env: Env = vec![None; v.slots];
        self.run(v, 0, &mut env, None, out)
    }

    /// The priority a fact carries: the key of the first prioritized
    /// consumer whose pivot matches it, else FIFO.
    pub fn priority_of(&self, variants: &[&Variant], key: &[Value], value: &[Value]) -> PriorityKey {
        for v in variants {
            let PrioritySpec::Keyed { direction, key: k } = &v.priority else { continue };
            let Some(Pivot::Atom(pi)) = v.pivot else { continue };
            let TPremise::Atom(atom) = &self.program.rules[v.rule].premises[pi] else { continue };
            let mut env: Env = vec![None; v.slots];
            if match_fact(self.relation(atom.relation), &atom.args, key, value, &mut env, self.consts).is_none() {
                continue;
            }
            if let Some(x) = eval(k, &env, self.consts) {
                return match direction {
                    Direction::Asc => PriorityKey::Asc(x),
                    Direction::Desc => PriorityKey::Desc(Reverse(x)),
                };
            }
        }
        PriorityKey::Fifo
    }
}
