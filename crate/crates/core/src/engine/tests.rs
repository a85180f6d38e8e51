use std::collections::BTreeMap;

use super::*;

const GRAPH: &str = "type Vertex\nlattice Dist = MinDist\n\
    relation edge _ _ = _: Vertex, Vertex, Dist\n\
    relation distTo _ <= _: Vertex, Dist\n\
    const start: Vertex\n\
    rule init: distTo start <= 0\n\
    rule addDist: distTo v1 <= d1, edge v1 v2 = d2, d1 + d2 <= d --> distTo v2 <= d\n\
    order addDist by asc d1\n";

const NOT_REJECTS: &str = "type State\ntype Character\n\
    relation edge: Character, State, State\nrelation accepts: State\nrelation notRejectsAll: State\n\
    rule: accepts s --> notRejectsAll s\n\
    rule: edge c s1 s2, notRejectsAll s2 --> notRejectsAll s1\n";

fn graph() -> Solver {
    let consts = BTreeMap::from([("start".to_owned(), Value::sym("a"))]);
    Solver::from_source(GRAPH, &consts).unwrap()
}

fn edge(s: &mut Solver, a: &str, b: &str, w: u64) -> bool {
    s.insert_fact("edge", vec![Value::sym(a), Value::sym(b), Value::nat(w)]).unwrap()
}

fn dist(s: &Solver) -> Vec<(String, Value)> {
    s.facts("distTo")
        .unwrap()
        .into_iter()
        .map(|f| (f.args[0].as_sym().unwrap().to_string(), f.args[1].clone()))
        .collect()
}

fn triangle() -> Solver {
    let mut s = graph();
    edge(&mut s, "a", "b", 1);
    edge(&mut s, "b", "c", 2);
    edge(&mut s, "a", "c", 5);
    s
}

#[test]
fn init_queues_the_axiom() {
    let s = graph();
    assert_eq!(s.pending(), 1);
    assert_eq!(s.fact_count(), 0);
}

#[test]
fn no_axioms_means_empty_queue() {
    let s = Solver::from_source(NOT_REJECTS, &BTreeMap::new()).unwrap();
    assert_eq!(s.pending(), 0);
}

#[test]
fn missing_const_is_named() {
    let err = Solver::from_source(GRAPH, &BTreeMap::new()).err().unwrap();
    assert!(err.contains("`start`"), "{err}");
}

#[test]
fn insert_subsumption() {
    let mut s = graph();
    assert!(edge(&mut s, "a", "b", 4));
    assert!(!edge(&mut s, "a", "b", 4));
    s.solve(1);
    assert!(!edge(&mut s, "a", "b", 4));
    assert!(s.insert_fact("distTo", vec![Value::sym("b"), Value::nat(3)]).unwrap());
    s.solve(1);
    assert!(!s.insert_fact("distTo", vec![Value::sym("b"), Value::nat(9)]).unwrap());
}

#[test]
fn insert_errors() {
    let mut s = graph();
    assert_eq!(
        s.insert_fact("nope", vec![]),
        Err(EngineError::UnknownRelation("nope".into()))
    );
    assert!(matches!(s.insert_fact("edge", vec![Value::sym("a")]), Err(EngineError::Arity { .. })));
    assert!(matches!(
        s.insert_fact("edge", vec![Value::sym("a"), Value::nat(1), Value::nat(1)]),
        Err(EngineError::Kind { position: 1, .. })
    ));
}

#[test]
fn shortest_paths() {
    let mut s = triangle();
    let stats = s.solve(1);
    assert_eq!(
        dist(&s),
        vec![("a".into(), Value::nat(0)), ("b".into(), Value::nat(1)), ("c".into(), Value::nat(3))]
    );
    assert_eq!(stats.popped, stats.discarded + stats.applied);
    assert_eq!(stats.strict_updates_of("distTo"), 3);
    assert_eq!(s.audit_fixpoint(), 0);
}

#[test]
fn only_the_axiom_without_edges() {
    let mut s = graph();
    s.solve(1);
    assert_eq!(dist(&s), vec![("a".into(), Value::nat(0))]);
}

#[test]
fn query_patterns() {
    let mut s = triangle();
    s.solve(1);
    let c = s.query("distTo", &[Some(Value::sym("c"))]).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].args, vec![Value::sym("c"), Value::nat(3)]);
    assert_eq!(s.query("distTo", &[None]).unwrap().len(), 3);
    assert_eq!(s.query("distTo", &[None, None]).unwrap().len(), 3);
    let empty = Solver::from_source(NOT_REJECTS, &BTreeMap::new()).unwrap();
    assert!(empty.query("accepts", &[None]).unwrap().is_empty());
    assert!(s.query("nope", &[]).is_err());
}

#[test]
fn step_until_done_matches_solve() {
    let mut a = triangle();
    assert!(a.step());
    while a.step() {}
    assert!(!a.step());
    let mut b = triangle();
    b.solve(1);
    assert_eq!(a.canonical_dump(), b.canonical_dump());
}

#[test]
fn not_rejects_all_over_an_edge() {
    let mut s = Solver::from_source(NOT_REJECTS, &BTreeMap::new()).unwrap();
    s.insert_fact("accepts", vec![Value::sym("s")]).unwrap();
    s.insert_fact("edge", vec![Value::sym("c"), Value::sym("q"), Value::sym("s")]).unwrap();
    s.solve(1);
    let got: Vec<Value> = s.facts("notRejectsAll").unwrap().into_iter().map(|f| f.args[0].clone()).collect();
    assert_eq!(got, vec![Value::sym("q"), Value::sym("s")]);
}

#[test]
fn incremental_touches_only_changed_facts() {
    let mut s = triangle();
    s.solve(1);
    let stats = s
        .resolve_incremental([("edge".to_owned(), vec![Value::sym("c"), Value::sym("d"), Value::nat(1)])], 1)
        .unwrap();
    assert_eq!(stats.strict_updates_of("distTo"), 1);
    assert_eq!(dist(&s).last().unwrap(), &("d".into(), Value::nat(4)));

    let again = s
        .resolve_incremental([("edge".to_owned(), vec![Value::sym("c"), Value::sym("d"), Value::nat(1)])], 1)
        .unwrap();
    assert_eq!(again.popped, 0);
    assert_eq!(again.total_strict_updates(), 0);

    s.resolve_incremental([("edge".to_owned(), vec![Value::sym("a"), Value::sym("c"), Value::nat(1)])], 1)
        .unwrap();
    assert_eq!(
        dist(&s),
        vec![
            ("a".into(), Value::nat(0)),
            ("b".into(), Value::nat(1)),
            ("c".into(), Value::nat(1)),
            ("d".into(), Value::nat(2))
        ]
    );
}

#[test]
fn dump_is_stable_across_workers_and_schedules() {
    let reference = {
        let mut s = triangle();
        s.solve(1);
        s.canonical_dump()
    };
    for workers in [2, 8] {
        for schedule in [Schedule::Priority, Schedule::Fifo, Schedule::Random(3)] {
            let mut s = triangle();
            s.set_schedule(schedule);
            s.solve(workers);
            assert_eq!(s.canonical_dump(), reference);
        }
    }
    assert!(reference.starts_with(DUMP_HEADER));
    assert!(reference.contains("{\"relation\":\"distTo\",\"args\":[\"c\",3]}"));
}

#[test]
fn empty_dump_is_header_only() {
    let s = Solver::from_source(NOT_REJECTS, &BTreeMap::new()).unwrap();
    assert_eq!(s.canonical_dump(), format!("{DUMP_HEADER}\n"));
}

#[test]
fn naive_agrees_and_fires_more() {
    let mut a = triangle();
    let semi = a.solve(1);
    let mut b = triangle();
    let naive = b.solve_naive();
    assert_eq!(a.canonical_dump(), b.canonical_dump());
    assert!(semi.total_firings() < naive.total_firings());
}

#[test]
fn forall_rule() {
    let src = "type State\ntype Ctor\nrelation hyperEdge: State, Ctor, Set(State)\n\
               relation accepts: State\nrelation notRejectsAll: State\n\
               rule: accepts s --> notRejectsAll s\n\
               rule: hyperEdge s1 c ss, forall s in ss. notRejectsAll s --> notRejectsAll s1\n";
    let mut s = Solver::from_source(src, &BTreeMap::new()).unwrap();
    let he = |s: &mut Solver, h: &str, kids: &[&str]| {
        s.insert_fact(
            "hyperEdge",
            vec![Value::sym(h), Value::sym("f"), Value::set(kids.iter().map(|k| Value::sym(k)))],
        )
        .unwrap()
    };
    he(&mut s, "top", &["x", "y"]);
    he(&mut s, "x", &[]);
    he(&mut s, "dead", &["nowhere"]);
    he(&mut s, "z", &["dead"]);
    s.insert_fact("accepts", vec![Value::sym("y")]).unwrap();
    s.solve(1);
    let got: Vec<String> = s
        .facts("notRejectsAll")
        .unwrap()
        .into_iter()
        .map(|f| f.args[0].as_sym().unwrap().to_string())
        .collect();
    assert_eq!(got, vec!["top", "x", "y"]);
    assert_eq!(s.audit_fixpoint(), 0);
}

#[test]
fn const_text_parsing() {
    assert_eq!(parse_value_text(&Ty::opaque("V"), "12"), Ok(Value::sym("12")));
    assert_eq!(parse_value_text(&Ty::Nat, "inf"), Ok(Value::inf()));
    assert_eq!(parse_value_text(&Ty::Int, "-3"), Ok(Value::Int(-3)));
}
