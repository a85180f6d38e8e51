use serde_json::{json, Value as Json};

use crate::lang::{Rule, TExpr, TPremise, TypedProgram};

use super::{EvalPlan, Lookup, Pivot, PrioritySpec, StepKind, Variant};

fn expr(p: &TypedProgram, rule: &Rule, e: &TExpr) -> String {
    match e {
        TExpr::Var(v) => rule.vars.get(*v).map_or_else(|| "<elem>".to_owned(), |x| x.name.clone()),
        TExpr::Value(v) => v.canonical_string(),
        TExpr::Const(c) => p.consts[*c].name.clone(),
        TExpr::Add(l, r) => format!("({} + {})", expr(p, rule, l), expr(p, rule, r)),
        TExpr::Wildcard => "_".into(),
    }
}

fn premise(p: &TypedProgram, rule: &Rule, i: usize) -> String {
    let atom = |rel: usize, args: &[TExpr]| {
        let args: Vec<String> = args.iter().map(|a| expr(p, rule, a)).collect();
        format!("{}({})", p.relations[rel].name, args.join(", "))
    };
    match &rule.premises[i] {
        TPremise::Atom(a) => atom(a.relation, &a.args),
        TPremise::Constraint { op, lhs, rhs } => {
            format!("{} {} {}", expr(p, rule, lhs), op.as_str(), expr(p, rule, rhs))
        }
        TPremise::Assign { var, expr: e } => format!("{} := {}", rule.vars[*var].name, expr(p, rule, e)),
        TPremise::Forall { var, collection, atom: a } => format!(
            "forall {} in {}. {}",
            rule.vars[*var].name,
            expr(p, rule, collection),
            atom(a.relation, &a.args)
        ),
    }
}

fn variant(p: &TypedProgram, v: &Variant) -> Json {
    let rule = &p.rules[v.rule];
    let steps: Vec<Json> = v
        .steps
        .iter()
        .map(|s| {
            let text = premise(p, rule, s.premise);
            match &s.kind {
                StepKind::Atom { lookup, bound, .. } => {
                    let lookup = match lookup {
                        Lookup::Delta => json!("delta"),
                        Lookup::Scan => json!("scan"),
                        Lookup::Primary => json!("primary"),
                        Lookup::Index { index, cols } => json!({"index": index, "cols": cols}),
                        Lookup::Member { member, col } => json!({"member": member, "col": col}),
                    };
                    json!({"premise": s.premise, "atom": text, "bound": bound, "lookup": lookup})
                }
                StepKind::ForallPivot { elem_col, .. } => {
                    json!({"premise": s.premise, "forall_pivot": text, "elem_col": elem_col})
                }
                StepKind::Constraint => json!({"premise": s.premise, "filter": text}),
                StepKind::Assign => json!({"premise": s.premise, "assign": text}),
                StepKind::Forall => json!({"premise": s.premise, "check": text}),
            }
        })
        .collect();
    let priority = match &v.priority {
        PrioritySpec::Fifo => json!("fifo"),
        PrioritySpec::Keyed { direction, key } => json!({"direction": direction, "key": expr(p, rule, key)}),
    };
    let pivot = match v.pivot {
        None => Json::Null,
        Some(Pivot::Atom(i)) => json!({"atom": i}),
        Some(Pivot::ForallInner(i)) => json!({"forall": i}),
    };
    json!({
        "rule": rule.name,
        "pivot": pivot,
        "steps": steps,
        "priority": priority,
    })
}

/// A JSON rendering of the plan for inspection and golden tests.
pub fn plan_to_json(plan: &EvalPlan) -> Json {
    let p = &*plan.program;
    let indexes: serde_json::Map<String, Json> = p
        .relations
        .iter()
        .zip(&plan.indexes.relations)
        .map(|(r, ix)| {
            (
                r.name.clone(),
                json!({"primary": ix.primary, "ordered": ix.ordered, "members": ix.members}),
            )
        })
        .collect();
    let graph: serde_json::Map<String, Json> = p
        .relations
        .iter()
        .zip(&plan.graph.consumers)
        .map(|(r, cs)| {
            let cs: Vec<Json> = cs.iter().map(|&(ri, pi)| json!([p.rules[ri].name, pi])).collect();
            (r.name.clone(), Json::Array(cs))
        })
        .collect();
    json!({
        "consumers": graph,
        "init": plan.init.iter().map(|v| variant(p, v)).collect::<Vec<_>>(),
        "delta": plan.delta.iter().map(|v| variant(p, v)).collect::<Vec<_>>(),
        "full": plan.full.iter().map(|v| variant(p, v)).collect::<Vec<_>>(),
        "indexes": indexes,
    })
}
