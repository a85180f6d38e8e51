use std::collections::{BTreeMap, BTreeSet};

use fpop_core::corpus::{self, gen, oracle};
use fpop_core::engine::{Schedule, Solver};
use fpop_core::lang::{check_binding_order, compile, format_program, parse_program};
use fpop_core::lattice::{ExtNat, LatticeDescriptor, LatticeKind, Partition, Symbol, Ty, Value};
use fpop_core::planner::{check_well_formed, plan};
use proptest::prelude::*;

const SYMS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn sym() -> Ty {
    Ty::opaque("S")
}

fn nat() -> impl Strategy<Value = Value> {
    prop_oneof![1 => Just(Value::inf()), 9 => (0u64..20).prop_map(Value::nat)]
}

fn set() -> impl Strategy<Value = Value> {
    proptest::sample::subsequence(SYMS.to_vec(), 0..=5).prop_map(|xs| Value::set(xs.into_iter().map(Value::sym)))
}

fn partition(universe: usize) -> impl Strategy<Value = Partition> {
    proptest::collection::vec(0usize..5, universe).prop_map(|assign| {
        let mut blocks: Vec<Vec<Symbol>> = vec![Vec::new(); 4];
        for (i, b) in assign.into_iter().enumerate() {
            if b < 4 {
                blocks[b].push(Symbol::new(SYMS[i]));
            }
        }
        Partition::new(blocks).unwrap()
    })
}

fn value_of(kind: &LatticeKind) -> BoxedStrategy<Value> {
    match kind {
        LatticeKind::MinDist | LatticeKind::MaxNat => nat().boxed(),
        LatticeKind::Bool => any::<bool>().prop_map(Value::Bool).boxed(),
        LatticeKind::Set(_) => set().boxed(),
        LatticeKind::Partition(_) => partition(5).prop_map(Value::Partition).boxed(),
        LatticeKind::Dual(inner) => value_of(inner),
        LatticeKind::Product(parts) => parts
            .iter()
            .map(value_of)
            .collect::<Vec<_>>()
            .prop_map(Value::Tuple)
            .boxed(),
    }
}

fn lattices() -> Vec<LatticeDescriptor> {
    let kinds = vec![
        LatticeKind::MinDist,
        LatticeKind::MaxNat,
        LatticeKind::Bool,
        LatticeKind::Set(sym()),
        LatticeKind::Partition(sym()),
        LatticeKind::Dual(Box::new(LatticeKind::MinDist)),
        LatticeKind::Product(vec![LatticeKind::MaxNat, LatticeKind::Bool, LatticeKind::Partition(sym())]),
    ];
    kinds.into_iter().map(|k| LatticeDescriptor::new(k.to_string(), k)).collect()
}

fn triple_in(ls: Vec<LatticeDescriptor>) -> impl Strategy<Value = (LatticeDescriptor, Value, Value, Value)> {
    proptest::sample::select(ls).prop_flat_map(|l| {
        let v = value_of(&l.kind);
        (Just(l), v.clone(), v.clone(), v)
    })
}

fn lattice_and_triple() -> impl Strategy<Value = (LatticeDescriptor, Value, Value, Value)> {
    triple_in(lattices())
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(2000))]

    #[test]
    fn lattice_laws((l, a, b, c) in lattice_and_triple()) {
        let j = |x: &Value, y: &Value| l.join(x, y).unwrap();
        prop_assert_eq!(j(&a, &b), j(&b, &a));
        prop_assert_eq!(j(&j(&a, &b), &c), j(&a, &j(&b, &c)));
        prop_assert_eq!(j(&a, &a), a.clone());
        prop_assert_eq!(l.leq(&a, &b).unwrap(), j(&a, &b) == b);
        prop_assert_eq!(j(&l.bottom(), &a), a.clone());
    }

    #[test]
    fn double_dual_is_the_identity(
        (l, a, b, _c) in triple_in(lattices().into_iter().filter(|l| l.kind.top().is_some()).collect())
    ) {
        let dd = LatticeDescriptor::new("dd", LatticeKind::Dual(Box::new(LatticeKind::Dual(Box::new(l.kind.clone())))));
        prop_assert_eq!(dd.join(&a, &b).unwrap(), l.join(&a, &b).unwrap());
        prop_assert_eq!(dd.leq(&a, &b).unwrap(), l.leq(&a, &b).unwrap());
        prop_assert_eq!(dd.bottom(), l.bottom());
    }

    #[test]
    fn canonical_strings_identify_values((_l, a, b, _c) in lattice_and_triple()) {
        prop_assert_eq!(a == b, a.canonical_string() == b.canonical_string());
    }
}

/// Every partition of `universe` symbols plus one stand-in for the ambient
/// block, as restricted-growth strings.
fn all_partitions(universe: usize) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut labels = Vec::new();
    grow(&mut Vec::new(), universe + 1, &mut labels);
    labels
        .into_iter()
        .map(|l| {
            // Position `universe` is the ambient stand-in; its block stays implicit.
            let ambient = l[universe];
            let mut blocks: BTreeMap<usize, Vec<Symbol>> = BTreeMap::new();
            for i in 0..universe {
                if l[i] != ambient {
                    blocks.entry(l[i]).or_default().push(Symbol::new(SYMS[i]));
                }
            }
            Partition::new(blocks.into_values()).unwrap()
        })
        .collect()
}

fn same_block(p: &Partition, universe: usize) -> BTreeSet<(usize, usize)> {
    let block = |i: usize| if i < universe { p.block_of(&Symbol::new(SYMS[i])) } else { None };
    (0..=universe)
        .flat_map(|x| (0..=universe).map(move |y| (x, y)))
        .filter(|&(x, y)| block(x) == block(y))
        .collect()
}

#[test]
fn partition_join_is_the_coarsest_common_refinement() {
    let l = LatticeDescriptor::new("P", LatticeKind::Partition(sym()));
    let bell = [1, 2, 5, 15, 52, 203];
    for universe in 0..=5 {
        let all = all_partitions(universe);
        assert_eq!(all.len(), bell[universe]);
        let rel: Vec<BTreeSet<(usize, usize)>> = all.iter().map(|p| same_block(p, universe)).collect();
        for (a, ra) in all.iter().zip(&rel) {
            for (b, rb) in all.iter().zip(&rel) {
                let Value::Partition(j) = l.join(&Value::Partition(a.clone()), &Value::Partition(b.clone())).unwrap() else {
                    panic!("join of partitions")
                };
                let want: BTreeSet<_> = ra.intersection(rb).cloned().collect();
                // The join must be the coarsest partition finer than both, which
                // for equivalence relations is their intersection.
                assert_eq!(same_block(&j, universe), want, "{a:?} join {b:?}");
                assert_eq!(l.leq(&Value::Partition(a.clone()), &Value::Partition(b.clone())).unwrap(), rb.is_subset(ra));
            }
        }
    }
}

/// A random key-only Datalog program over one symbol type.
#[derive(Clone, Debug)]
struct RandomProgram {
    arities: Vec<usize>,
    rules: Vec<(Vec<(usize, Vec<usize>)>, (usize, Vec<usize>))>,
}

const VARS: [&str; 4] = ["x", "y", "z", "w"];

impl RandomProgram {
    fn source(&self) -> String {
        let mut s = String::from("type S\n");
        for (i, a) in self.arities.iter().enumerate() {
            s.push_str(&format!("relation r{i}: {}\n", vec!["S"; *a].join(", ")));
        }
        let atom = |(r, args): &(usize, Vec<usize>)| {
            let mut t = format!("r{r}");
            for v in args {
                t.push(' ');
                t.push_str(VARS[*v]);
            }
            t
        };
        for (k, (body, head)) in self.rules.iter().enumerate() {
            let body: Vec<String> = body.iter().map(atom).collect();
            s.push_str(&format!("rule g{k}: {} --> {}\n", body.join(", "), atom(head)));
        }
        s
    }
}

fn atom_over(arities: Vec<usize>) -> impl Strategy<Value = (usize, Vec<usize>)> {
    (0..arities.len()).prop_flat_map(move |r| (Just(r), proptest::collection::vec(0..VARS.len(), arities[r])))
}

fn random_program() -> impl Strategy<Value = RandomProgram> {
    proptest::collection::vec(1usize..=2, 2..=4).prop_flat_map(|arities| {
        let body = proptest::collection::vec(atom_over(arities.clone()), 1..=3);
        let rule = (body, 0..arities.len(), proptest::collection::vec(any::<prop::sample::Index>(), 2)).prop_map({
            let arities = arities.clone();
            move |(body, h, picks)| {
                let bound: Vec<usize> = body.iter().flat_map(|(_, a)| a.clone()).collect::<BTreeSet<_>>().into_iter().collect();
                let args = (0..arities[h]).map(|i| bound[picks[i].index(bound.len())]).collect();
                (body, (h, args))
            }
        });
        (Just(arities), proptest::collection::vec(rule, 1..=4)).prop_map(|(arities, rules)| RandomProgram { arities, rules })
    })
}

/// Facts as (relation, symbol indices); indices are folded onto three symbols.
fn random_facts(arities: &[usize]) -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
    proptest::collection::vec(atom_over(arities.to_vec()), 0..12)
}

fn program_with_facts() -> impl Strategy<Value = (RandomProgram, Vec<(usize, Vec<usize>)>)> {
    random_program().prop_flat_map(|p| {
        let facts = random_facts(&p.arities);
        (Just(p), facts)
    })
}

fn solver_for(p: &RandomProgram, facts: &[(usize, Vec<usize>)]) -> Solver {
    let mut s = Solver::from_source(&p.source(), &BTreeMap::new()).unwrap();
    for (r, args) in facts {
        s.insert_fact(&format!("r{r}"), args.iter().map(|&a| Value::sym(SYMS[a % 3])).collect()).unwrap();
    }
    s
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn random_programs_round_trip(p in random_program()) {
        let src = p.source();
        let ast = parse_program(&src).unwrap();
        let again = parse_program(&format_program(&ast)).unwrap();
        prop_assert_eq!(again, ast);
    }

    #[test]
    fn random_programs_are_range_restricted_and_plan_cleanly(p in random_program()) {
        let tp = compile(&p.source()).unwrap();
        for rule in &tp.rules {
            prop_assert!(check_binding_order(rule).is_ok(), "{}", rule.name);
        }
        let plan = plan(tp).unwrap();
        prop_assert!(check_well_formed(&plan).is_ok());
    }

    #[test]
    fn naive_and_semi_naive_agree((p, facts) in program_with_facts()) {
        let mut a = solver_for(&p, &facts);
        let stats = a.solve(1);
        prop_assert_eq!(stats.popped, stats.discarded + stats.applied);
        let mut b = solver_for(&p, &facts);
        b.solve_naive();
        prop_assert_eq!(a.canonical_dump(), b.canonical_dump());
        prop_assert_eq!(a.audit_fixpoint(), 0);
    }

    #[test]
    fn schedules_and_workers_are_confluent((p, facts) in program_with_facts(), seed in any::<u64>()) {
        let mut a = solver_for(&p, &facts);
        a.solve(1);
        let mut b = solver_for(&p, &facts);
        b.set_schedule(Schedule::Random(seed));
        b.solve(4);
        prop_assert_eq!(a.canonical_dump(), b.canonical_dump());
    }

    #[test]
    fn diagnostics_ignore_declaration_order(p in random_program(), perm in Just(()).prop_perturb(|_, mut rng| rng.random::<u64>())) {
        // Break the program: drop one relation declaration and leave a rule head unbound.
        let mut lines: Vec<String> = p.source().lines().map(String::from).collect();
        lines.retain(|l| l != "relation r0: S" && l != "relation r0: S, S");
        lines.push("rule broken: r1 x --> r1 q".into());
        let messages = |src: &str| {
            let errs = compile(src).err().unwrap_or_default();
            let mut m: Vec<String> = errs.into_iter().map(|d| d.message).collect();
            m.sort();
            m
        };
        let want = messages(&lines.join("\n"));
        prop_assert!(!want.is_empty());
        let mut shuffled = lines.clone();
        let mut state = perm | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(messages(&shuffled.join("\n")), want);
    }
}

fn distances_of(g: &corpus::GraphInstance) -> BTreeMap<String, ExtNat> {
    let mut s = Solver::from_source(corpus::GRAPH_DISTANCE, &BTreeMap::new()).unwrap();
    corpus::load(&mut s, &g.facts());
    s.solve(1);
    corpus::distances(&s)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn fixpoint_is_monotone_in_the_inputs(seed in any::<u64>(), n in 2usize..30, m in 0usize..80, keep in 0usize..80) {
        let big = gen::random_graph(seed, n, m, 20);
        let mut small = big.clone();
        small.edges.truncate(keep.min(big.edges.len()));
        let (ds, db) = (distances_of(&small), distances_of(&big));
        for (v, d) in &ds {
            // MinDist: a larger lattice value is a smaller distance.
            prop_assert!(db.get(v).is_some_and(|x| x <= d), "{v}: {d} then {:?}", db.get(v));
        }
    }

    #[test]
    fn incremental_equals_from_scratch(seed in any::<u64>(), n in 2usize..30, m in 0usize..80, split in 0usize..80) {
        let g = gen::random_graph(seed, n, m, 20);
        let cut = split.min(g.edges.len());
        let mut first = g.clone();
        first.edges.truncate(cut);
        let mut inc = Solver::from_source(corpus::GRAPH_DISTANCE, &BTreeMap::new()).unwrap();
        corpus::load(&mut inc, &first.facts());
        inc.solve(1);
        let rest = g.edge_facts().into_iter().skip(cut).map(|f| (f.relation, f.args));
        inc.resolve_incremental(rest, 2).unwrap();
        let mut scratch = Solver::from_source(corpus::GRAPH_DISTANCE, &BTreeMap::new()).unwrap();
        corpus::load(&mut scratch, &g.facts());
        scratch.solve(1);
        prop_assert_eq!(inc.canonical_dump(), scratch.canonical_dump());
    }

    #[test]
    fn dijkstra_bound(seed in any::<u64>(), n in 2usize..40, m in 0usize..150) {
        let g = gen::random_graph(seed, n, m, 30);
        let mut s = Solver::from_source(corpus::GRAPH_DISTANCE, &BTreeMap::new()).unwrap();
        corpus::load(&mut s, &g.facts());
        let stats = s.solve(1);
        let reachable = oracle::shortest_paths(&g).values().filter(|d| **d != ExtNat::Inf).count() as u64;
        prop_assert_eq!(stats.strict_updates_of("distTo"), reachable);
        prop_assert!(stats.firings_of("addDist") <= g.edges.len() as u64 + 1);
        prop_assert_eq!(stats.popped, stats.discarded + stats.applied);
    }

    #[test]
    fn minimization_matches_table_filling(seed in any::<u64>(), n in 1usize..15, k in 1usize..4) {
        let d = gen::random_dfa(seed, n, k);
        let mut s = Solver::from_source(corpus::DFA_MINIMIZE, &BTreeMap::new()).unwrap();
        corpus::load(&mut s, &d.facts());
        s.solve(2);
        prop_assert_eq!(corpus::engine_partition(&s), oracle::minimize(&d));
    }
}
