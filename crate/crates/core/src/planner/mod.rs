//! Turns a typed program into an evaluation plan.

mod dump;
mod index;
mod join;

use std::sync::Arc;

use crate::lang::{Diagnostic, Direction, RelId, TExpr, TPremise, TypedProgram, VarId};

pub use dump::plan_to_json;
pub use index::{plan_indexes, IndexPlan, RelationIndexes};
pub use join::order_steps;

/// Consumption and production edges between relations and rules.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    /// Per relation, the (rule, premise) pairs that read it.
    pub consumers: Vec<Vec<(usize, usize)>>,
    /// Per rule, the relations its heads write.
    pub producers: Vec<Vec<RelId>>,
}

pub fn build_dependency_graph(p: &TypedProgram) -> DependencyGraph {
    let mut g = DependencyGraph {
        consumers: vec![Vec::new(); p.relations.len()],
        producers: vec![Vec::new(); p.rules.len()],
    };
    for (ri, rule) in p.rules.iter().enumerate() {
        for (pi, prem) in rule.premises.iter().enumerate() {
            match prem {
                TPremise::Atom(a) => g.consumers[a.relation].push((ri, pi)),
                TPremise::Forall { atom, .. } => g.consumers[atom.relation].push((ri, pi)),
                _ => {}
            }
        }
        for h in &rule.heads {
            if !g.producers[ri].contains(&h.relation) {
                g.producers[ri].push(h.relation);
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pivot {
    Atom(usize),
    /// A new fact of a `forall` body relation; binds the element slot.
    ForallInner(usize),
}

impl Pivot {
    pub fn premise(self) -> usize {
        match self {
            Pivot::Atom(p) | Pivot::ForallInner(p) => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lookup {
    /// The pivot itself: matched against the delta fact.
    Delta,
    Scan,
    Primary,
    /// Prefix lookup on an ordered index; `cols` are key columns in index order.
    Index { index: usize, cols: Vec<usize> },
    /// Facts whose set-valued key column contains the element slot.
    Member { member: usize, col: usize },
}

#[derive(Clone, Debug)]
pub enum StepKind {
    Atom { relation: RelId, bound: Vec<usize>, lookup: Lookup },
    Constraint,
    Assign,
    Forall,
    /// Pivot on a `forall` body relation. `elem_col` is the key column holding
    /// the bound element, when the binder appears there as a plain variable.
    ForallPivot { relation: RelId, elem_col: Option<usize> },
}

#[derive(Clone, Debug)]
pub struct Step {
    pub premise: usize,
    pub kind: StepKind,
}

#[derive(Clone, Debug)]
pub struct HeadSpec {
    pub relation: RelId,
    pub key: Vec<TExpr>,
    /// Empty for key-only relations.
    pub value: Vec<TExpr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrioritySpec {
    Fifo,
    Keyed { direction: Direction, key: TExpr },
}

#[derive(Clone, Debug)]
pub struct Variant {
    pub id: usize,
    pub rule: usize,
    pub pivot: Option<Pivot>,
    pub steps: Vec<Step>,
    pub heads: Vec<HeadSpec>,
    pub priority: PrioritySpec,
    /// Size of the binding environment: rule variables plus the element slot.
    pub slots: usize,
}

impl Variant {
    /// The extra environment slot a forall pivot binds.
    pub fn elem_slot(&self) -> VarId {
        self.slots - 1
    }
}

#[derive(Clone, Debug)]
pub struct EvalPlan {
    pub program: Arc<TypedProgram>,
    pub graph: DependencyGraph,
    /// Semi-naive variants, one per relational premise of each non-axiom rule.
    pub delta: Vec<Variant>,
    /// Variants fired once at initialization.
    pub init: Vec<Variant>,
    /// One full join per rule, used by naive evaluation and audits.
    pub full: Vec<Variant>,
    pub indexes: IndexPlan,
    /// Per relation, the delta variants it triggers.
    pub consumers: Vec<Vec<usize>>,
}

fn heads_of(p: &TypedProgram, rule: usize) -> Vec<HeadSpec> {
    p.rules[rule]
        .heads
        .iter()
        .map(|h| {
            let rel = &p.relations[h.relation];
            HeadSpec {
                relation: h.relation,
                key: rel.key_cols.iter().map(|&c| h.args[c].clone()).collect(),
                value: rel.lattice_cols.iter().map(|&c| h.args[c].clone()).collect(),
            }
        })
        .collect()
}

/// Builds delta, init and full variants for every rule, without priorities
/// or index assignments.
pub fn normalize(p: &TypedProgram) -> (Vec<Variant>, Vec<Variant>, Vec<Variant>) {
    let mut delta = Vec::new();
    let mut init = Vec::new();
    let mut full = Vec::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        let slots = rule.vars.len() + 1;
        let make = |pivot: Option<Pivot>, id: usize| Variant {
            id,
            rule: ri,
            pivot,
            steps: order_steps(p, rule, pivot),
            heads: heads_of(p, ri),
            priority: PrioritySpec::Fifo,
            slots,
        };
        full.push(make(None, full.len()));
        if rule.is_axiom() {
            init.push(make(None, init.len()));
            continue;
        }
        for (pi, prem) in rule.premises.iter().enumerate() {
            let pivot = match prem {
                TPremise::Atom(_) => Pivot::Atom(pi),
                TPremise::Forall { .. } => Pivot::ForallInner(pi),
                _ => continue,
            };
            delta.push(make(Some(pivot), delta.len()));
        }
    }
    (delta, init, full)
}

/// Attaches order directives to the delta variants whose pivot binds every
/// variable of the directive's key. Directives no pivot can evaluate are
/// reported.
pub fn attach_priorities(p: &TypedProgram, variants: &mut [Variant]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for o in &p.orders {
        let needed = o.key.var_list();
        let mut attached = false;
        for v in variants.iter_mut().filter(|v| v.rule == o.rule) {
            let Some(Pivot::Atom(pi)) = v.pivot else { continue };
            let TPremise::Atom(atom) = &p.rules[v.rule].premises[pi] else { continue };
            let binds = needed
                .iter()
                .all(|x| atom.args.iter().any(|a| matches!(a, TExpr::Var(y) if y == x)));
            if binds && v.priority == PrioritySpec::Fifo {
                v.priority = PrioritySpec::Keyed {
                    direction: o.direction,
                    key: o.key.clone(),
                };
                attached = true;
            }
        }
        if !attached {
            diags.push(Diagnostic::error(
                o.span,
                format!(
                    "order directive for `{}` reads variables that no single premise binds",
                    p.rules[o.rule].name
                ),
            ));
        }
    }
    diags
}

/// Runs every planning stage.
pub fn plan(p: TypedProgram) -> Result<EvalPlan, Vec<Diagnostic>> {
    let graph = build_dependency_graph(&p);
    let (mut delta, mut init, mut full) = normalize(&p);
    let diags = attach_priorities(&p, &mut delta);
    if !diags.is_empty() {
        return Err(diags);
    }
    let indexes = plan_indexes(&p, [&delta, &init, &full].into_iter().flatten());
    for v in delta.iter_mut().chain(init.iter_mut()).chain(full.iter_mut()) {
        indexes.assign_lookups(&p, v);
    }
    let mut consumers = vec![Vec::new(); p.relations.len()];
    for v in &delta {
        let pi = v.pivot.expect("delta variants have pivots").premise();
        let rel = match &p.rules[v.rule].premises[pi] {
            TPremise::Atom(a) => a.relation,
            TPremise::Forall { atom, .. } => atom.relation,
            _ => unreachable!(),
        };
        consumers[rel].push(v.id);
    }
    let out = EvalPlan {
        program: Arc::new(p),
        graph,
        delta,
        init,
        full,
        indexes,
        consumers,
    };
    debug_assert_eq!(check_well_formed(&out), Ok(()));
    Ok(out)
}

/// Replays each variant's steps and reports any read of an unbound slot, a
/// step order that is not a permutation with the pivot first, or a lookup on
/// columns that are not bound.
pub fn check_well_formed(plan: &EvalPlan) -> Result<(), String> {
    let p = &*plan.program;
    for v in plan.delta.iter().chain(&plan.init).chain(&plan.full) {
        let rule = &p.rules[v.rule];
        let ctx = |msg: String| format!("{} (variant {} pivot {:?}): {msg}", rule.name, v.id, v.pivot);
        let mut seen: Vec<usize> = v.steps.iter().map(|s| s.premise).collect();
        if let Some(pivot) = v.pivot {
            if seen.first() != Some(&pivot.premise()) {
                return Err(ctx("pivot is not the first step".into()));
            }
            if let Pivot::ForallInner(pi) = pivot {
                // The forall premise appears twice: as pivot and as the final check.
                let pos = seen.iter().rposition(|&s| s == pi).unwrap();
                if pos == 0 {
                    return Err(ctx("forall pivot has no full check".into()));
                }
                seen.remove(pos);
            }
        }
        seen.sort_unstable();
        if seen != (0..rule.premises.len()).collect::<Vec<_>>() {
            return Err(ctx("steps are not a permutation of the premises".into()));
        }
        let mut bound = vec![false; v.slots];
        let all_bound = |e: &TExpr, bound: &[bool]| e.var_list().iter().all(|&x| bound[x]);
        for step in &v.steps {
            let prem = &rule.premises[step.premise];
            match (&step.kind, prem) {
                (StepKind::ForallPivot { elem_col, .. }, TPremise::Forall { .. }) => {
                    if elem_col.is_some() {
                        bound[v.elem_slot()] = true;
                    }
                }
                (StepKind::Atom { relation, bound: cols, lookup }, TPremise::Atom(a)) => {
                    let rel = &p.relations[*relation];
                    for &k in cols {
                        let e = &a.args[rel.key_cols[k]];
                        if matches!(e, TExpr::Wildcard) || !all_bound(e, &bound) {
                            return Err(ctx(format!("lookup column {k} is not bound")));
                        }
                    }
                    match lookup {
                        Lookup::Index { cols: ic, .. } => {
                            let mut a1 = ic.clone();
                            let mut b1 = cols.clone();
                            a1.sort_unstable();
                            b1.sort_unstable();
                            if a1 != b1 {
                                return Err(ctx("index prefix differs from bound columns".into()));
                            }
                        }
                        Lookup::Member { .. } if !bound[v.elem_slot()] => {
                            return Err(ctx("membership lookup without a bound element".into()));
                        }
                        Lookup::Primary if cols.len() != rel.key_cols.len() => {
                            return Err(ctx("primary lookup without a full key".into()));
                        }
                        _ => {}
                    }
                    for e in &a.args {
                        if let TExpr::Var(x) = e {
                            bound[*x] = true;
                        } else if !all_bound(e, &bound) {
                            return Err(ctx("atom argument reads an unbound variable".into()));
                        }
                    }
                }
                (StepKind::Constraint, TPremise::Constraint { lhs, rhs, .. }) => {
                    if !all_bound(lhs, &bound) || !all_bound(rhs, &bound) {
                        return Err(ctx("constraint reads an unbound variable".into()));
                    }
                }
                (StepKind::Assign, TPremise::Assign { var, expr }) => {
                    if !all_bound(expr, &bound) {
                        return Err(ctx("assignment reads an unbound variable".into()));
                    }
                    bound[*var] = true;
                }
                (StepKind::Forall, TPremise::Forall { var, collection, atom }) => {
                    if !all_bound(collection, &bound) {
                        return Err(ctx("forall collection is unbound".into()));
                    }
                    for e in &atom.args {
                        if e.var_list().iter().any(|x| x != var && !bound[*x]) {
                            return Err(ctx("forall body reads an unbound variable".into()));
                        }
                    }
                }
                _ => return Err(ctx("step kind does not match its premise".into())),
            }
        }
        for h in &v.heads {
            for e in h.key.iter().chain(&h.value) {
                if !all_bound(e, &bound) {
                    return Err(ctx("head reads an unbound variable".into()));
                }
            }
        }
        if let PrioritySpec::Keyed { key, .. } = &v.priority {
            let Some(Pivot::Atom(pi)) = v.pivot else {
                return Err(ctx("priority on a variant without an atom pivot".into()));
            };
            let TPremise::Atom(a) = &rule.premises[pi] else { unreachable!() };
            if key.var_list().iter().any(|x| !a.args.contains(&TExpr::Var(*x))) {
                return Err(ctx("priority key is not bound by the pivot".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
