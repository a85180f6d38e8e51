//! Bundled programs, problem instances, reference oracles and generators.

pub mod gen;
pub mod io;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{Fact, Solver};
use crate::lattice::{partition_from_undistinguished_pairs, ExtNat, Symbol, Value};

pub const GRAPH_DISTANCE: &str = include_str!("../../corpus/graph_distance.fpop");
pub const GRAPH_DISTANCE_CONST: &str = include_str!("../../corpus/graph_distance_const.fpop");
pub const DFA_MINIMIZE: &str = include_str!("../../corpus/dfa_minimize.fpop");
pub const TREE_AUTOMATA: &str = include_str!("../../corpus/tree_automata.fpop");
pub const CNF_PARSE: &str = include_str!("../../corpus/cnf_parse.fpop");
pub const WEIGHTED_PARSE: &str = include_str!("../../corpus/weighted_parse.fpop");

/// Every bundled program by file stem.
pub const PROGRAMS: &[(&str, &str)] = &[
    ("graph_distance", GRAPH_DISTANCE),
    ("graph_distance_const", GRAPH_DISTANCE_CONST),
    ("dfa_minimize", DFA_MINIMIZE),
    ("tree_automata", TREE_AUTOMATA),
    ("cnf_parse", CNF_PARSE),
    ("weighted_parse", WEIGHTED_PARSE),
];

fn fact(relation: &str, args: Vec<Value>) -> Fact {
    Fact {
        relation: relation.to_owned(),
        args,
    }
}

fn syms<'a>(xs: impl IntoIterator<Item = &'a String>) -> Value {
    Value::set(xs.into_iter().map(Value::sym))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphInstance {
    pub vertices: Vec<String>,
    /// (source, target, weight)
    pub edges: Vec<(String, String, u64)>,
    pub start: String,
}

impl GraphInstance {
    pub fn edge_facts(&self) -> Vec<Fact> {
        self.edges
            .iter()
            .map(|(a, b, w)| fact("edge", vec![Value::sym(a), Value::sym(b), Value::nat(*w)]))
            .collect()
    }

    /// Facts for `graph_distance.fpop`: the edges and the start vertex.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = self.edge_facts();
        out.push(fact("startVertex", vec![Value::sym(&self.start)]));
        out
    }

    pub fn consts(&self) -> BTreeMap<String, Value> {
        BTreeMap::from([("start".to_owned(), Value::sym(&self.start))])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfaInstance {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    /// (character, from, to)
    pub edges: Vec<(String, String, String)>,
    pub accepting: BTreeSet<String>,
    pub start: String,
}

impl DfaInstance {
    pub fn facts(&self) -> Vec<Fact> {
        let mut out: Vec<Fact> = self
            .edges
            .iter()
            .map(|(c, a, b)| fact("edge", vec![Value::sym(c), Value::sym(a), Value::sym(b)]))
            .collect();
        out.push(fact("isStart", vec![Value::sym(&self.start)]));
        for s in &self.states {
            let rel = if self.accepting.contains(s) { "accepts" } else { "notAccepts" };
            out.push(fact(rel, vec![Value::sym(s)]));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeAutomatonInstance {
    pub states: Vec<String>,
    /// (head state, constructor, child states)
    pub hyperedges: Vec<(String, String, BTreeSet<String>)>,
    pub accepting: BTreeSet<String>,
}

impl TreeAutomatonInstance {
    pub fn facts(&self) -> Vec<Fact> {
        let mut out: Vec<Fact> = self
            .hyperedges
            .iter()
            .map(|(h, c, kids)| fact("hyperEdge", vec![Value::sym(h), Value::sym(c), syms(kids)]))
            .collect();
        out.extend(self.accepting.iter().map(|s| fact("accepts", vec![Value::sym(s)])));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfGrammar {
    pub nonterminals: Vec<String>,
    /// (nt, terminal, weight)
    pub tokens: Vec<(String, String, u64)>,
    /// (nt, a, b, weight)
    pub concat: Vec<(String, String, String, u64)>,
    /// (nt, weight)
    pub epsilon: Vec<(String, u64)>,
    /// (nt, a): nt matches the empty string where a parses next.
    pub lookahead: Vec<(String, String)>,
    /// (nt, a, b): nt parses a span both a and b parse.
    pub and: Vec<(String, String, String)>,
}

fn input_facts(input: &[String]) -> Vec<Fact> {
    let mut out: Vec<Fact> = input
        .iter()
        .enumerate()
        .map(|(i, c)| fact("token", vec![Value::nat(i as u64), Value::sym(c)]))
        .collect();
    out.extend((0..=input.len()).map(|i| fact("position", vec![Value::nat(i as u64)])));
    out
}

impl CnfGrammar {
    /// Facts for `cnf_parse.fpop`; weights are ignored.
    pub fn facts(&self, input: &[String]) -> Vec<Fact> {
        let mut out = input_facts(input);
        for (nt, t, _) in &self.tokens {
            out.push(fact("tokenProduction", vec![Value::sym(nt), Value::sym(t)]));
        }
        for (nt, a, b, _) in &self.concat {
            out.push(fact("concatenationProduction", vec![Value::sym(nt), Value::sym(a), Value::sym(b)]));
        }
        for (nt, _) in &self.epsilon {
            out.push(fact("epsilonProduction", vec![Value::sym(nt)]));
        }
        for (nt, a) in &self.lookahead {
            out.push(fact("lookaheadProduction", vec![Value::sym(nt), Value::sym(a)]));
        }
        for (nt, a, b) in &self.and {
            out.push(fact("andProduction", vec![Value::sym(nt), Value::sym(a), Value::sym(b)]));
        }
        out
    }

    /// Facts for `weighted_parse.fpop`. Lookahead and conjunction
    /// productions have no weighted form and are left out.
    pub fn weighted_facts(&self, input: &[String]) -> Vec<Fact> {
        let mut out = input_facts(input);
        for (nt, t, w) in &self.tokens {
            out.push(fact("tokenProduction", vec![Value::sym(nt), Value::sym(t), Value::nat(*w)]));
        }
        for (nt, a, b, w) in &self.concat {
            out.push(fact(
                "concatenationProduction",
                vec![Value::sym(nt), Value::sym(a), Value::sym(b), Value::nat(*w)],
            ));
        }
        for (nt, w) in &self.epsilon {
            out.push(fact("epsilonProduction", vec![Value::sym(nt), Value::nat(*w)]));
        }
        out
    }
}

/// Inserts facts into a solver, panicking on facts the program rejects.
pub fn load(solver: &mut Solver, facts: &[Fact]) {
    for f in facts {
        solver
            .insert_fact(&f.relation, f.args.clone())
            .unwrap_or_else(|e| panic!("{}: {e}", f.to_json_line()));
    }
}

fn sym_of(v: &Value) -> String {
    v.as_sym().expect("symbol argument").to_string()
}

/// `distTo` as a map; vertices without a fact are absent.
pub fn distances(solver: &Solver) -> BTreeMap<String, ExtNat> {
    solver
        .facts("distTo")
        .expect("program declares distTo")
        .into_iter()
        .map(|f| match &f.args[1] {
            Value::Nat(d) => (sym_of(&f.args[0]), *d),
            other => panic!("distance {other}"),
        })
        .collect()
}

/// The symbols of a unary relation.
pub fn unary(solver: &Solver, relation: &str) -> BTreeSet<String> {
    solver
        .facts(relation)
        .expect("relation exists")
        .into_iter()
        .map(|f| sym_of(&f.args[0]))
        .collect()
}

/// Equivalence classes of reachable, live states from a solved
/// `dfa_minimize` program, as sorted blocks.
pub fn engine_partition(solver: &Solver) -> Vec<BTreeSet<String>> {
    let live: BTreeSet<Symbol> = unary(solver, "reaches")
        .intersection(&unary(solver, "notRejectsAll"))
        .map(|s| Symbol::new(s))
        .collect();
    let distinguished: BTreeSet<(Symbol, Symbol)> = solver
        .facts("distinguished")
        .expect("relation exists")
        .into_iter()
        .map(|f| (Symbol::new(sym_of(&f.args[0])), Symbol::new(sym_of(&f.args[1]))))
        .filter(|(a, b)| live.contains(a) && live.contains(b))
        .collect();
    match partition_from_undistinguished_pairs(&live, &distinguished).expect("distinguishability is an equivalence") {
        Value::Partition(p) => normalize_blocks(p.blocks().iter().map(|b| b.iter().map(|s| s.to_string()).collect())),
        _ => unreachable!(),
    }
}

/// Sorts blocks so partitions compare structurally.
pub fn normalize_blocks(blocks: impl IntoIterator<Item = BTreeSet<String>>) -> Vec<BTreeSet<String>> {
    let mut out: Vec<BTreeSet<String>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
    out.sort();
    out
}

/// The `parse` chart as (symbol, start, end) triples.
pub fn chart(solver: &Solver) -> BTreeSet<(String, u64, u64)> {
    solver
        .facts("parse")
        .expect("relation exists")
        .into_iter()
        .map(|f| (sym_of(&f.args[0]), nat(&f.args[1]), nat(&f.args[2])))
        .collect()
}

/// The weighted `parse` chart.
pub fn weighted_chart(solver: &Solver) -> BTreeMap<(String, u64, u64), ExtNat> {
    solver
        .facts("parse")
        .expect("relation exists")
        .into_iter()
        .map(|f| match &f.args[3] {
            Value::Nat(w) => ((sym_of(&f.args[0]), nat(&f.args[1]), nat(&f.args[2])), *w),
            other => panic!("weight {other}"),
        })
        .collect()
}

fn nat(v: &Value) -> u64 {
    match v {
        Value::Nat(ExtNat::Fin(n)) => *n,
        other => panic!("position {other}"),
    }
}

/// A named program together with the facts and consts of one instance.
#[derive(Clone, Debug)]
pub struct CorpusInstance {
    pub name: String,
    pub program: &'static str,
    pub facts: Vec<Fact>,
    pub consts: BTreeMap<String, Value>,
}

impl CorpusInstance {
    pub fn solver(&self) -> Solver {
        let mut s = Solver::from_source(self.program, &self.consts).expect("corpus programs validate");
        load(&mut s, &self.facts);
        s
    }
}

/// The hand-written lookahead fixture: `L -> &A`, `S -> L A`, `A -> 'a'`.
pub fn lookahead_fixture() -> (CnfGrammar, Vec<String>) {
    let g = CnfGrammar {
        nonterminals: vec!["S".into(), "L".into(), "A".into()],
        tokens: vec![("A".into(), "a".into(), 0)],
        concat: vec![("S".into(), "L".into(), "A".into(), 0)],
        lookahead: vec![("L".into(), "A".into())],
        ..CnfGrammar::default()
    };
    (g, vec!["a".into(), "a".into()])
}

/// The hand-written conjunction fixture: `S -> X & Y` where `X -> A B` and
/// `Y -> A C`, `B` and `C` both match 'b', `A` matches 'a'.
pub fn conjunction_fixture() -> (CnfGrammar, Vec<String>) {
    let g = CnfGrammar {
        nonterminals: ["S", "X", "Y", "A", "B", "C", "Z"].map(String::from).to_vec(),
        tokens: vec![
            ("A".into(), "a".into(), 0),
            ("B".into(), "b".into(), 0),
            ("C".into(), "b".into(), 0),
            ("Z".into(), "a".into(), 0),
        ],
        concat: vec![
            ("X".into(), "A".into(), "B".into(), 0),
            ("Y".into(), "A".into(), "C".into(), 0),
            ("Y".into(), "Z".into(), "Z".into(), 0),
        ],
        and: vec![("S".into(), "X".into(), "Y".into())],
        ..CnfGrammar::default()
    };
    (g, ["a", "b", "a", "a"].map(String::from).to_vec())
}

/// A small fixed graph: a->b=1, b->c=2, a->c=5, plus an unreachable d.
pub fn triangle_graph() -> GraphInstance {
    GraphInstance {
        vertices: ["a", "b", "c", "d"].map(String::from).to_vec(),
        edges: vec![
            ("a".into(), "b".into(), 1),
            ("b".into(), "c".into(), 2),
            ("a".into(), "c".into(), 5),
            ("d".into(), "a".into(), 1),
        ],
        start: "a".into(),
    }
}

/// Every corpus program paired with representative instances.
pub fn instances() -> Vec<CorpusInstance> {
    let mut out = Vec::new();
    let mut graphs = vec![("triangle".to_owned(), triangle_graph())];
    graphs.push(("random".into(), gen::random_graph(11, 40, 160, 20)));
    graphs.push(("layered".into(), gen::layered_graph(4, 4)));
    for (name, g) in graphs {
        out.push(CorpusInstance {
            name: format!("graph_distance/{name}"),
            program: GRAPH_DISTANCE,
            facts: g.facts(),
            consts: BTreeMap::new(),
        });
        out.push(CorpusInstance {
            name: format!("graph_distance_const/{name}"),
            program: GRAPH_DISTANCE_CONST,
            facts: g.edge_facts(),
            consts: g.consts(),
        });
    }
    for seed in [1, 2] {
        out.push(CorpusInstance {
            name: format!("dfa_minimize/random{seed}"),
            program: DFA_MINIMIZE,
            facts: gen::random_dfa(seed, 12, 2).facts(),
            consts: BTreeMap::new(),
        });
        out.push(CorpusInstance {
            name: format!("tree_automata/random{seed}"),
            program: TREE_AUTOMATA,
            facts: gen::random_tree_automaton(seed, 10, 25).facts(),
            consts: BTreeMap::new(),
        });
        let (g, input) = gen::random_grammar(seed, 5, 6);
        out.push(CorpusInstance {
            name: format!("cnf_parse/random{seed}"),
            program: CNF_PARSE,
            facts: g.facts(&input),
            consts: BTreeMap::new(),
        });
        out.push(CorpusInstance {
            name: format!("weighted_parse/random{seed}"),
            program: WEIGHTED_PARSE,
            facts: g.weighted_facts(&input),
            consts: BTreeMap::new(),
        });
    }
    for (name, (g, input)) in [("lookahead", lookahead_fixture()), ("conjunction", conjunction_fixture())] {
        out.push(CorpusInstance {
            name: format!("cnf_parse/{name}"),
            program: CNF_PARSE,
            facts: g.facts(&input),
            consts: BTreeMap::new(),
        });
    }
    out
}
