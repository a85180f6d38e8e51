//! Reference solutions computed without the engine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::lattice::ExtNat;

use super::{CnfGrammar, DfaInstance, GraphInstance, TreeAutomatonInstance};

/// Bellman-Ford relaxation to stabilization. Every vertex named by the
/// instance appears; unreachable ones map to `Inf`.
pub fn shortest_paths(g: &GraphInstance) -> BTreeMap<String, ExtNat> {
    let mut dist: BTreeMap<String, ExtNat> = g.vertices.iter().map(|v| (v.clone(), ExtNat::Inf)).collect();
    for (a, b, _) in &g.edges {
        dist.entry(a.clone()).or_insert(ExtNat::Inf);
        dist.entry(b.clone()).or_insert(ExtNat::Inf);
    }
    dist.insert(g.start.clone(), ExtNat::Fin(0));
    for _ in 0..dist.len() {
        let mut changed = false;
        for (a, b, w) in &g.edges {
            let through = dist[a].saturating_add(ExtNat::Fin(*w));
            if through < dist[b] {
                dist.insert(b.clone(), through);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// States reachable from the start.
pub fn reachable(d: &DfaInstance) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([d.start.clone()]);
    let mut todo = VecDeque::from([d.start.clone()]);
    while let Some(s) = todo.pop_front() {
        for (_, a, b) in &d.edges {
            if *a == s && seen.insert(b.clone()) {
                todo.push_back(b.clone());
            }
        }
    }
    seen
}

/// States from which some accepting state is reachable.
pub fn live(d: &DfaInstance) -> BTreeSet<String> {
    let mut seen = d.accepting.clone();
    let mut todo: VecDeque<String> = seen.iter().cloned().collect();
    while let Some(s) = todo.pop_front() {
        for (_, a, b) in &d.edges {
            if *b == s && seen.insert(a.clone()) {
                todo.push_back(a.clone());
            }
        }
    }
    seen
}

/// Table-filling minimization. Missing transitions go to an implicit
/// rejecting sink. Returns the equivalence classes among reachable, live
/// states, sorted.
pub fn minimize(d: &DfaInstance) -> Vec<BTreeSet<String>> {
    let mut states: Vec<String> = d.states.clone();
    for (_, a, b) in &d.edges {
        states.push(a.clone());
        states.push(b.clone());
    }
    states.sort();
    states.dedup();
    let n = states.len();
    let sink = n;
    let idx = |s: &String| states.binary_search(s).unwrap();
    let mut alphabet: Vec<&String> = d.alphabet.iter().chain(d.edges.iter().map(|e| &e.0)).collect();
    alphabet.sort();
    alphabet.dedup();
    let mut delta = vec![vec![sink; alphabet.len()]; n + 1];
    for (c, a, b) in &d.edges {
        delta[idx(a)][alphabet.binary_search(&c).unwrap()] = idx(b);
    }
    let accepting: Vec<bool> = (0..=n).map(|i| i < n && d.accepting.contains(&states[i])).collect();
    let mut marked = vec![vec![false; n + 1]; n + 1];
    for p in 0..=n {
        for q in 0..=n {
            marked[p][q] = accepting[p] != accepting[q];
        }
    }
    loop {
        let mut changed = false;
        for p in 0..=n {
            for q in 0..=n {
                if !marked[p][q] && (0..alphabet.len()).any(|c| marked[delta[p][c]][delta[q][c]]) {
                    marked[p][q] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let keep: BTreeSet<String> = reachable(d).intersection(&live(d)).cloned().collect();
    let kept: Vec<usize> = keep.iter().map(idx).collect();
    let mut blocks: Vec<BTreeSet<String>> = Vec::new();
    let mut placed = vec![false; n];
    for (i, &p) in kept.iter().enumerate() {
        if placed[p] {
            continue;
        }
        let mut block = BTreeSet::new();
        for &q in &kept[i..] {
            if !marked[p][q] {
                placed[q] = true;
                block.insert(states[q].clone());
            }
        }
        blocks.push(block);
    }
    super::normalize_blocks(blocks)
}

/// States that accept at least one tree, by saturation.
pub fn tree_not_rejects_all(t: &TreeAutomatonInstance) -> BTreeSet<String> {
    let mut good = t.accepting.clone();
    loop {
        let before = good.len();
        for (head, _, kids) in &t.hyperedges {
            if kids.iter().all(|k| good.contains(k)) {
                good.insert(head.clone());
            }
        }
        if good.len() == before {
            return good;
        }
    }
}

/// The full parse chart, including lookahead and conjunction productions.
pub fn cyk(g: &CnfGrammar, input: &[String]) -> BTreeSet<(String, u64, u64)> {
    let n = input.len() as u64;
    let mut chart: BTreeSet<(String, u64, u64)> = BTreeSet::new();
    for (i, c) in input.iter().enumerate() {
        for (nt, t, _) in &g.tokens {
            if t == c {
                chart.insert((nt.clone(), i as u64, i as u64 + 1));
            }
        }
    }
    for (nt, _) in &g.epsilon {
        for i in 0..=n {
            chart.insert((nt.clone(), i, i));
        }
    }
    // Epsilon and lookahead spans make the chart cyclic, so sweep all spans
    // until nothing changes.
    loop {
        let before = chart.len();
        for i in 0..=n {
            for k in i..=n {
                for (nt, a, b, _) in &g.concat {
                    if (i..=k).any(|j| chart.contains(&(a.clone(), i, j)) && chart.contains(&(b.clone(), j, k))) {
                        chart.insert((nt.clone(), i, k));
                    }
                }
                for (nt, a, b) in &g.and {
                    if chart.contains(&(a.clone(), i, k)) && chart.contains(&(b.clone(), i, k)) {
                        chart.insert((nt.clone(), i, k));
                    }
                }
                for (nt, a) in &g.lookahead {
                    if chart.contains(&(a.clone(), i, k)) {
                        chart.insert((nt.clone(), i, i));
                    }
                }
            }
        }
        if chart.len() == before {
            return chart;
        }
    }
}

/// Least derivation weight for every derivable (symbol, i, j), using token,
/// concatenation and epsilon productions only.
pub fn weighted_cyk(g: &CnfGrammar, input: &[String]) -> BTreeMap<(String, u64, u64), ExtNat> {
    let n = input.len() as u64;
    let mut best: BTreeMap<(String, u64, u64), u64> = BTreeMap::new();
    let offer = |best: &mut BTreeMap<(String, u64, u64), u64>, k: (String, u64, u64), w: u64| match best.get(&k) {
        Some(&old) if old <= w => false,
        _ => {
            best.insert(k, w);
            true
        }
    };
    for (i, c) in input.iter().enumerate() {
        for (nt, t, w) in &g.tokens {
            if t == c {
                offer(&mut best, (nt.clone(), i as u64, i as u64 + 1), *w);
            }
        }
    }
    for (nt, w) in &g.epsilon {
        for i in 0..=n {
            offer(&mut best, (nt.clone(), i, i), *w);
        }
    }
    loop {
        let mut changed = false;
        for i in 0..=n {
            for k in i..=n {
                for (nt, a, b, w) in &g.concat {
                    for j in i..=k {
                        let (Some(&wa), Some(&wb)) = (best.get(&(a.clone(), i, j)), best.get(&(b.clone(), j, k))) else {
                            continue;
                        };
                        changed |= offer(&mut best, (nt.clone(), i, k), w + wa + wb);
                    }
                }
            }
        }
        if !changed {
            return best.into_iter().map(|(k, w)| (k, ExtNat::Fin(w))).collect();
        }
    }
}
