use crate::lang::{compile, Direction};

use super::*;

const GRAPH: &str = "type Vertex\nlattice Dist = MinDist\n\
    relation edge _ _ = _: Vertex, Vertex, Dist\n\
    relation distTo _ <= _: Vertex, Dist\n\
    const start: Vertex\n\
    rule init: distTo start <= 0\n\
    rule addDist: distTo v1 <= d1, edge v1 v2 = d2, d1 + d2 <= d --> distTo v2 <= d\n\
    order addDist by asc d1\n";

const CNF: &str = "type Sym\ntype Term\n\
    relation parse: Sym, Nat, Nat\n\
    relation concatenationProduction: Sym, Sym, Sym\n\
    rule: concatenationProduction nt a b, parse a i j, parse b j k --> parse nt i k\n";

const DFA: &str = "type State\ntype Character\n\
    relation edge: Character, State, State\n\
    relation accepts: State\nrelation notAccepts: State\n\
    relation distinguished: State, State\n\
    rule: accepts s, notAccepts s' --> distinguished s s'\n\
    rule: edge c s1 s2, edge c s1' s2', distinguished s2 s2' --> distinguished s1 s1'\n";

const TREE: &str = "type State\ntype Ctor\n\
    relation hyperEdge: State, Ctor, Set(State)\n\
    relation accepts: State\nrelation notRejectsAll: State\n\
    rule: accepts s --> notRejectsAll s\n\
    rule: hyperEdge s1 c ss, forall s in ss. notRejectsAll s --> notRejectsAll s1\n";

fn planned(src: &str) -> EvalPlan {
    let plan = plan(compile(src).unwrap()).unwrap();
    check_well_formed(&plan).unwrap();
    plan
}

fn rel(plan: &EvalPlan, name: &str) -> usize {
    plan.program.relation_id(name).unwrap()
}

#[test]
fn graph_dependencies() {
    let plan = planned(GRAPH);
    let g = &plan.graph;
    let add = plan.program.rule_id("addDist").unwrap();
    assert_eq!(g.consumers[rel(&plan, "distTo")], vec![(add, 0)]);
    assert_eq!(g.consumers[rel(&plan, "edge")], vec![(add, 1)]);
    assert_eq!(g.producers[add], vec![rel(&plan, "distTo")]);
    let init = plan.program.rule_id("init").unwrap();
    assert_eq!(g.producers[init], vec![rel(&plan, "distTo")]);
}

#[test]
fn reachability_is_cyclic() {
    let plan = planned(
        "type State\ntype Character\nrelation edge: Character, State, State\nrelation isStart: State\n\
         relation reaches: State\nrule: isStart s --> reaches s\nrule: reaches s1, edge c s1 s2 --> reaches s2",
    );
    let r = rel(&plan, "reaches");
    assert!(plan.graph.consumers[r].iter().any(|&(ri, _)| plan.graph.producers[ri].contains(&r)));
}

#[test]
fn axiom_only_program() {
    let plan = planned("type V\nconst a: V\nrelation r: V\nrule: r a");
    assert!(plan.graph.consumers.iter().all(Vec::is_empty));
    assert_eq!(plan.graph.producers, vec![vec![0]]);
    assert_eq!(plan.init.len(), 1);
    assert!(plan.delta.is_empty());
}

#[test]
fn graph_variants_and_priorities() {
    let plan = planned(GRAPH);
    assert_eq!(plan.init.len(), 1);
    assert_eq!(plan.delta.len(), 2);
    let dist_pivot = &plan.delta[0];
    assert_eq!(dist_pivot.pivot, Some(Pivot::Atom(0)));
    assert!(matches!(
        &dist_pivot.priority,
        PrioritySpec::Keyed { direction: Direction::Asc, .. }
    ));
    // The edge pivot cannot evaluate `d1` before joining `distTo`.
    assert_eq!(plan.delta[1].pivot, Some(Pivot::Atom(1)));
    assert_eq!(plan.delta[1].priority, PrioritySpec::Fifo);
    // Pivot on distTo looks up edges by source vertex.
    let edge = rel(&plan, "edge");
    assert_eq!(plan.indexes.relations[edge].ordered, vec![vec![0]]);
    match &dist_pivot.steps[1].kind {
        StepKind::Atom { relation, lookup, .. } => {
            assert_eq!(*relation, edge);
            assert_eq!(*lookup, Lookup::Index { index: 0, cols: vec![0] });
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(dist_pivot.steps[2].kind, StepKind::Assign));
}

#[test]
fn no_directives_means_fifo() {
    let plan = planned(CNF);
    assert!(plan.delta.iter().all(|v| v.priority == PrioritySpec::Fifo));
}

#[test]
fn cnf_parse_indexes() {
    let plan = planned(CNF);
    let parse = rel(&plan, "parse");
    let mut ordered = plan.indexes.relations[parse].ordered.clone();
    ordered.sort();
    assert_eq!(ordered, vec![vec![0, 1], vec![0, 2]]);
    assert_eq!(plan.indexes.relations[parse].primary, vec![0, 1, 2]);
}

#[test]
fn dfa_edge_index_chain() {
    let plan = planned(DFA);
    let edge = rel(&plan, "edge");
    let ordered = &plan.indexes.relations[edge].ordered;
    // Lookups by target, and by (character, target), both served by prefixes.
    let covers = |set: &[usize]| {
        ordered
            .iter()
            .any(|c| c.len() >= set.len() && c[..set.len()].iter().all(|x| set.contains(x)))
    };
    assert!(covers(&[2]) && covers(&[0, 2]) && covers(&[0]), "{ordered:?}");
    assert_eq!(ordered.len(), 2);
}

#[test]
fn single_premise_rules_need_no_secondary_index() {
    let plan = planned("type V\nrelation a: V\nrelation b: V\nrule: a x --> b x");
    assert!(plan.indexes.relations.iter().all(|r| r.ordered.is_empty() && r.members.is_empty()));
}

#[test]
fn forall_pivot_uses_membership() {
    let plan = planned(TREE);
    let rule = plan.program.rules.iter().position(|r| r.premises.len() == 2).unwrap();
    let variants: Vec<&Variant> = plan.delta.iter().filter(|v| v.rule == rule).collect();
    assert_eq!(variants.len(), 2);
    assert_eq!(variants[0].pivot, Some(Pivot::Atom(0)));
    assert_eq!(variants[1].pivot, Some(Pivot::ForallInner(1)));
    assert!(matches!(variants[1].steps[1].kind, StepKind::Atom { lookup: Lookup::Member { col: 2, .. }, .. }));
    assert!(matches!(variants[1].steps[2].kind, StepKind::Forall));
    let nra = rel(&plan, "notRejectsAll");
    assert!(plan.consumers[nra].contains(&variants[1].id));
    assert_eq!(plan.indexes.relations[rel(&plan, "hyperEdge")].members, vec![2]);
}

#[test]
fn unusable_directive_is_reported() {
    let src = "type V\nlattice D = MinDist\nrelation e _ _ = _: V, V, D\nrelation d _ <= _: V, D\n\
               rule r: d a <= x, e a b = y, x + y <= z --> d b <= z\norder r by asc x + y\n";
    let err = plan(compile(src).unwrap()).unwrap_err();
    assert!(err[0].message.contains("order directive for `r`"), "{err:?}");
}

#[test]
fn completeness_against_dependency_graph() {
    for src in [GRAPH, CNF, DFA, TREE] {
        let plan = planned(src);
        let mut from_variants: Vec<(usize, usize)> = plan
            .delta
            .iter()
            .map(|v| (v.rule, v.pivot.unwrap().premise()))
            .collect();
        let mut from_graph: Vec<(usize, usize)> = plan.graph.consumers.iter().flatten().copied().collect();
        from_variants.sort();
        from_graph.sort();
        assert_eq!(from_variants, from_graph);
    }
}

#[test]
fn plan_dump_is_json() {
    let plan = planned(GRAPH);
    let json = plan_to_json(&plan);
    assert_eq!(json["delta"][0]["priority"]["direction"], "asc");
    assert_eq!(json["delta"][0]["priority"]["key"], "d1");
    assert_eq!(json["indexes"]["edge"]["ordered"][0][0], 0);
}
