use std::collections::BTreeSet;

use crate::lang::{TExpr, TPremise, TypedProgram};

use super::{Lookup, Pivot, StepKind, Variant};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationIndexes {
    /// All key columns; always present.
    pub primary: Vec<usize>,
    /// Ordered secondary indexes; each is a column order usable by prefix.
    pub ordered: Vec<Vec<usize>>,
    /// Set-valued key columns with an element-to-rows index.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexPlan {
    pub relations: Vec<RelationIndexes>,
}

/// For a forall-pivot variant, the first atom step that holds the collection
/// variable in a key column, with that column.
fn member_step(p: &TypedProgram, v: &Variant) -> Option<(usize, usize)> {
    let Some(Pivot::ForallInner(pi)) = v.pivot else { return None };
    let StepKind::ForallPivot { elem_col: Some(_), .. } = v.steps[0].kind else { return None };
    let TPremise::Forall { collection: TExpr::Var(c), .. } = &p.rules[v.rule].premises[pi] else {
        return None;
    };
    for (si, step) in v.steps.iter().enumerate().skip(1) {
        let TPremise::Atom(a) = &p.rules[v.rule].premises[step.premise] else { continue };
        let rel = &p.relations[a.relation];
        if let Some(k) = rel.key_cols.iter().position(|&col| a.args[col] == TExpr::Var(*c)) {
            return Some((si, k));
        }
        if a.args.contains(&TExpr::Var(*c)) {
            return None;
        }
    }
    None
}

/// Collects the column sets each atom lookup needs and covers them with as
/// few ordered indexes as possible: sets are taken by ascending size and
/// either reuse an index whose prefix already equals them, extend an index
/// whose columns they contain, or start a new one.
pub fn plan_indexes<'a>(p: &TypedProgram, variants: impl IntoIterator<Item = &'a Variant>) -> IndexPlan {
    let mut need: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); p.relations.len()];
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); p.relations.len()];
    for v in variants {
        let member = member_step(p, v);
        for (si, step) in v.steps.iter().enumerate() {
            let StepKind::Atom { relation, bound, lookup } = &step.kind else { continue };
            if *lookup == Lookup::Delta {
                continue;
            }
            if let Some((msi, col)) = member {
                if msi == si {
                    members[*relation].insert(col);
                    continue;
                }
            }
            let full = p.relations[*relation].key_cols.len();
            if !bound.is_empty() && bound.len() < full {
                need[*relation].insert(bound.clone());
            }
        }
    }
    let relations = need
        .into_iter()
        .zip(members)
        .enumerate()
        .map(|(r, (sets, members))| {
            let mut sets: Vec<Vec<usize>> = sets.into_iter().collect();
            sets.sort_by_key(|s| (s.len(), s.clone()));
            let mut ordered: Vec<Vec<usize>> = Vec::new();
            for s in sets {
                if ordered.iter().any(|chain| prefix_is(chain, &s)) {
                    continue;
                }
                if let Some(chain) = ordered.iter_mut().find(|chain| chain.iter().all(|c| s.contains(c))) {
                    chain.extend(s.iter().filter(|c| !chain.contains(c)).copied().collect::<Vec<_>>());
                    continue;
                }
                ordered.push(s);
            }
            RelationIndexes {
                primary: (0..p.relations[r].key_cols.len()).collect(),
                ordered,
                members: members.into_iter().collect(),
            }
        })
        .collect();
    IndexPlan { relations }
}

fn prefix_is(chain: &[usize], set: &[usize]) -> bool {
    chain.len() >= set.len() && chain[..set.len()].iter().all(|c| set.contains(c))
}

impl IndexPlan {
    /// Rewrites every non-pivot atom step of `v` to the cheapest available
    /// lookup.
    pub fn assign_lookups(&self, p: &TypedProgram, v: &mut Variant) {
        let member = member_step(p, v);
        for (si, step) in v.steps.iter_mut().enumerate() {
            let StepKind::Atom { relation, bound, lookup } = &mut step.kind else { continue };
            if *lookup == Lookup::Delta {
                continue;
            }
            let idx = &self.relations[*relation];
            *lookup = if let Some((_, col)) = member.filter(|&(msi, _)| msi == si) {
                Lookup::Member {
                    member: idx.members.iter().position(|&c| c == col).expect("membership index planned"),
                    col,
                }
            } else if bound.is_empty() {
                Lookup::Scan
            } else if bound.len() == idx.primary.len() {
                Lookup::Primary
            } else {
                let index = idx
                    .ordered
                    .iter()
                    .position(|chain| prefix_is(chain, bound))
                    .expect("index planned for every bound column set");
                Lookup::Index {
                    index,
                    cols: idx.ordered[index][..bound.len()].to_vec(),
                }
            };
        }
    }
}
