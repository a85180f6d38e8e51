use crate::lang::{Rule, TExpr, TPremise, TypedProgram};

use super::{Lookup, Pivot, Step, StepKind};

fn expr_bound(e: &TExpr, bound: &[bool]) -> bool {
    !matches!(e, TExpr::Wildcard) && e.var_list().iter().all(|&v| bound[v])
}

/// Key columns of `args` that are bound under `bound`.
pub(crate) fn bound_key_cols(p: &TypedProgram, relation: usize, args: &[TExpr], bound: &[bool]) -> Vec<usize> {
    p.relations[relation]
        .key_cols
        .iter()
        .enumerate()
        .filter(|(_, &c)| expr_bound(&args[c], bound))
        .map(|(k, _)| k)
        .collect()
}

fn bind_atom(args: &[TExpr], bound: &mut [bool]) {
    for a in args {
        if let TExpr::Var(v) = a {
            bound[*v] = true;
        }
    }
}

fn ready(prem: &TPremise, bound: &[bool]) -> bool {
    match prem {
        TPremise::Atom(_) => false,
        TPremise::Constraint { lhs, rhs, .. } => expr_bound(lhs, bound) && expr_bound(rhs, bound),
        TPremise::Assign { expr, .. } => expr_bound(expr, bound),
        TPremise::Forall { var, collection, atom } => {
            expr_bound(collection, bound)
                && atom
                    .args
                    .iter()
                    .all(|e| e.var_list().iter().all(|v| v == var || bound[*v]))
        }
    }
}

/// Orders a rule's premises for one variant: the pivot first, then before
/// every atom pick all filters whose inputs are bound (textual order), then
/// the atom with the most bound key columns, ties by textual order.
pub fn order_steps(p: &TypedProgram, rule: &Rule, pivot: Option<Pivot>) -> Vec<Step> {
    let elem = rule.vars.len();
    let mut bound = vec![false; elem + 1];
    let mut steps = Vec::new();
    let mut pending: Vec<usize> = (0..rule.premises.len()).collect();
    // The element a forall pivot binds, and the collection variable it lives in.
    let mut member_of: Option<usize> = None;

    match pivot {
        Some(Pivot::Atom(pi)) => {
            let TPremise::Atom(a) = &rule.premises[pi] else { panic!("atom pivot on a non-atom") };
            steps.push(Step {
                premise: pi,
                kind: StepKind::Atom {
                    relation: a.relation,
                    bound: Vec::new(),
                    lookup: Lookup::Delta,
                },
            });
            bind_atom(&a.args, &mut bound);
            pending.retain(|&x| x != pi);
        }
        Some(Pivot::ForallInner(pi)) => {
            let TPremise::Forall { var, collection, atom } = &rule.premises[pi] else {
                panic!("forall pivot on a non-forall")
            };
            let rel = &p.relations[atom.relation];
            let elem_col = rel
                .key_cols
                .iter()
                .position(|&c| atom.args[c] == TExpr::Var(*var));
            if elem_col.is_some() {
                bound[elem] = true;
                if let TExpr::Var(c) = collection {
                    member_of = Some(*c);
                }
            }
            steps.push(Step {
                premise: pi,
                kind: StepKind::ForallPivot {
                    relation: atom.relation,
                    elem_col,
                },
            });
            // The forall itself stays pending as the full check.
        }
        None => {}
    }

    loop {
        loop {
            let Some(k) = pending.iter().position(|&pi| ready(&rule.premises[pi], &bound)) else { break };
            let pi = pending.remove(k);
            let kind = match &rule.premises[pi] {
                TPremise::Constraint { .. } => StepKind::Constraint,
                TPremise::Assign { var, .. } => {
                    bound[*var] = true;
                    StepKind::Assign
                }
                TPremise::Forall { .. } => StepKind::Forall,
                TPremise::Atom(_) => unreachable!(),
            };
            steps.push(Step { premise: pi, kind });
        }
        let mut best: Option<(usize, usize)> = None;
        for (k, &pi) in pending.iter().enumerate() {
            let TPremise::Atom(a) = &rule.premises[pi] else { continue };
            let mut score = bound_key_cols(p, a.relation, &a.args, &bound).len();
            if let Some(c) = member_of {
                if a.args.contains(&TExpr::Var(c)) && !bound[c] {
                    score += 1;
                }
            }
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        let Some((k, _)) = best else { break };
        let pi = pending.remove(k);
        let TPremise::Atom(a) = &rule.premises[pi] else { unreachable!() };
        let cols = bound_key_cols(p, a.relation, &a.args, &bound);
        steps.push(Step {
            premise: pi,
            kind: StepKind::Atom {
                relation: a.relation,
                bound: cols,
                lookup: Lookup::Scan,
            },
        });
        bind_atom(&a.args, &mut bound);
    }
    assert!(
        pending.is_empty(),
        "rule `{}` has premises that never become ready: {pending:?}",
        rule.name
    );
    steps
}
