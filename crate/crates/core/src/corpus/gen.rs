//! Seeded random instance generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CnfGrammar, DfaInstance, GraphInstance, TreeAutomatonInstance};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// `m` random directed edges over `n` vertices with weights in
/// `0..=max_w`. Parallel edges keep the smallest weight; no self loops.
/// The start vertex is `v0`.
pub fn random_graph(seed: u64, n: usize, m: usize, max_w: u64) -> GraphInstance {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = names("v", n);
    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for _ in 0..m {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let w = rng.random_range(0..=max_w);
        best.entry((a, b)).and_modify(|x| *x = (*x).min(w)).or_insert(w);
    }
    GraphInstance {
        edges: best
            .into_iter()
            .map(|((a, b), w)| (vertices[a].clone(), vertices[b].clone(), w))
            .collect(),
        start: vertices[0].clone(),
        vertices,
    }
}

/// A layered DAG from `s` through `layers` layers of `width` vertices, fully
/// connected between consecutive layers. Edges into a vertex are cheaper
/// the later their source sits in its layer, so processing edges in
/// insertion order improves most distances several times over.
pub fn layered_graph(layers: usize, width: usize) -> GraphInstance {
    assert!(layers >= 1 && width >= 1);
    let layer: Vec<Vec<String>> = (0..layers)
        .map(|l| (0..width).map(|i| format!("l{l}_{i}")).collect())
        .collect();
    let mut edges = Vec::new();
    for (i, v) in layer[0].iter().enumerate() {
        edges.push(("s".to_owned(), v.clone(), (width - i) as u64 * width as u64));
    }
    for l in 1..layers {
        for (i, u) in layer[l - 1].iter().enumerate() {
            for v in &layer[l] {
                edges.push((u.clone(), v.clone(), 1 + (width - 1 - i) as u64));
            }
        }
    }
    let mut vertices = vec!["s".to_owned()];
    vertices.extend(layer.into_iter().flatten());
    GraphInstance {
        vertices,
        edges,
        start: "s".into(),
    }
}

/// A complete DFA with `n` states over `k` characters; state `q0` starts and
/// each state accepts with probability one third.
pub fn random_dfa(seed: u64, n: usize, k: usize) -> DfaInstance {
    assert!(n >= 1 && k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = names("q", n);
    let alphabet = names("c", k);
    let mut edges = Vec::new();
    for s in &states {
        for c in &alphabet {
            edges.push((c.clone(), s.clone(), states.choose(&mut rng).unwrap().clone()));
        }
    }
    let accepting = states.iter().filter(|_| rng.random_ratio(1, 3)).cloned().collect();
    DfaInstance {
        start: states[0].clone(),
        states,
        alphabet,
        edges,
        accepting,
    }
}

/// A bottom-up tree automaton with `n` states and `m` hyperedges of up to
/// three children over constructors `f0..f3`; the first state accepts.
pub fn random_tree_automaton(seed: u64, n: usize, m: usize) -> TreeAutomatonInstance {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = names("t", n);
    let ctors = names("f", 4);
    let mut hyperedges = Vec::new();
    for _ in 0..m {
        let head = states.choose(&mut rng).unwrap().clone();
        let arity = rng.random_range(0..=3);
        let kids: BTreeSet<String> = (0..arity).map(|_| states.choose(&mut rng).unwrap().clone()).collect();
        hyperedges.push((head, ctors.choose(&mut rng).unwrap().clone(), kids));
    }
    hyperedges.sort();
    hyperedges.dedup();
    TreeAutomatonInstance {
        accepting: BTreeSet::from([states[0].clone()]),
        states,
        hyperedges,
    }
}

/// A random grammar with `n` nonterminals over terminals `a` and `b`, and a
/// random input of length `len`. Weights lie in `0..5`.
pub fn random_grammar(seed: u64, n: usize, len: usize) -> (CnfGrammar, Vec<String>) {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nts = names("N", n);
    let terms = ["a", "b"];
    let mut g = CnfGrammar {
        nonterminals: nts.clone(),
        ..CnfGrammar::default()
    };
    for nt in &nts {
        for t in terms {
            if rng.random_ratio(1, 2) {
                g.tokens.push((nt.clone(), t.to_owned(), rng.random_range(0..5)));
            }
        }
    }
    for _ in 0..2 * n {
        let pick = |rng: &mut ChaCha8Rng| nts.choose(rng).unwrap().clone();
        let (x, a, b) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        g.concat.push((x, a, b, rng.random_range(0..5)));
    }
    if rng.random_ratio(1, 2) {
        g.epsilon.push((nts.choose(&mut rng).unwrap().clone(), rng.random_range(0..5)));
    }
    let pick = |rng: &mut ChaCha8Rng| nts.choose(rng).unwrap().clone();
    let (x, a) = (pick(&mut rng), pick(&mut rng));
    g.lookahead.push((x, a));
    let (x, a, b) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
    g.and.push((x, a, b));
    let input = (0..len).map(|_| terms.choose(&mut rng).unwrap().to_string()).collect();
    (g, input)
}
