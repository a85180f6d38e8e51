//! Partitions of an open universe of symbols.
//!
//! A partition lists its explicit blocks; every symbol not mentioned in any
//! block belongs to one implicit *ambient* block. Ordering is by refinement
//! with finer partitions greater, so the bottom element is the partition with
//! no explicit blocks (everything together) and join is the coarsest common
//! refinement.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::value::Symbol;
use super::LatticeError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition {
    blocks: Vec<Vec<Symbol>>,
}

impl Partition {
    /// Builds a partition from explicit blocks. Empty blocks are dropped;
    /// overlapping blocks are rejected.
    pub fn new(blocks: impl IntoIterator<Item = Vec<Symbol>>) -> Result<Self, LatticeError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for mut block in blocks {
            block.sort();
            block.dedup();
            if block.is_empty() {
                continue;
            }
            for s in &block {
                if !seen.insert(s.clone()) {
                    return Err(LatticeError::OverlappingBlocks(s.to_string()));
                }
            }
            out.push(block);
        }
        out.sort();
        Ok(Partition { blocks: out })
    }

    /// The coarsest partition: a single ambient block.
    pub fn ambient() -> Self {
        Partition::default()
    }

    pub fn blocks(&self) -> &[Vec<Symbol>] {
        &self.blocks
    }

    /// Index of the explicit block holding `x`, or `None` for the ambient block.
    pub fn block_of(&self, x: &Symbol) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(x).is_ok())
    }

    /// True iff `x` and `y` lie in different blocks.
    pub fn separated(&self, x: &Symbol, y: &Symbol) -> bool {
        self.block_of(x) != self.block_of(y)
    }

    fn mentioned(&self) -> impl Iterator<Item = &Symbol> {
        self.blocks.iter().flatten()
    }

    /// Coarsest common refinement: two symbols share a block iff they share a
    /// block in both operands.
    pub fn refine(&self, other: &Partition) -> Partition {
        let mut groups: BTreeMap<(Option<usize>, Option<usize>), Vec<Symbol>> = BTreeMap::new();
        let elems: BTreeSet<&Symbol> = self.mentioned().chain(other.mentioned()).collect();
        for x in elems {
            groups
                .entry((self.block_of(x), other.block_of(x)))
                .or_default()
                .push(x.clone());
        }
        let mut blocks: Vec<Vec<Symbol>> = groups.into_values().collect();
        blocks.sort();
        Partition { blocks }
    }

    /// Finest common coarsening: the transitive closure of "same block in
    /// either operand". Anything linked to the ambient block of either side
    /// becomes ambient.
    pub fn coarsen(&self, other: &Partition) -> Partition {
        let elems: Vec<Symbol> = self
            .mentioned()
            .chain(other.mentioned())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&Symbol, usize> = elems.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let ambient = elems.len();
        let mut uf = UnionFind::new(elems.len() + 1);
        for p in [self, other] {
            for block in &p.blocks {
                let first = index[&block[0]];
                for s in &block[1..] {
                    uf.union(first, index[s]);
                }
            }
            for (i, s) in elems.iter().enumerate() {
                if p.block_of(s).is_none() {
                    uf.union(i, ambient);
                }
            }
        }
        let ambient_root = uf.find(ambient);
        let mut groups: BTreeMap<usize, Vec<Symbol>> = BTreeMap::new();
        for (i, s) in elems.iter().enumerate() {
            let r = uf.find(i);
            if r != ambient_root {
                groups.entry(r).or_default().push(s.clone());
            }
        }
        let mut blocks: Vec<Vec<Symbol>> = groups.into_values().collect();
        blocks.sort();
        Partition { blocks }
    }

    /// Refinement order: `self ⊑ other` iff `other` refines `self`.
    pub fn leq(&self, other: &Partition) -> bool {
        self.refine(other) == *other
    }

    /// Builds the partition of `universe` whose blocks are the classes of the
    /// "not distinguished" relation. Every member of the universe is placed in
    /// an explicit block.
    pub fn from_undistinguished_pairs(
        universe: &BTreeSet<Symbol>,
        distinguished: &BTreeSet<(Symbol, Symbol)>,
    ) -> Result<Partition, LatticeError> {
        let apart = |a: &Symbol, b: &Symbol| {
            distinguished.contains(&(a.clone(), b.clone())) || distinguished.contains(&(b.clone(), a.clone()))
        };
        let elems: Vec<&Symbol> = universe.iter().collect();
        let mut blocks: Vec<Vec<Symbol>> = Vec::new();
        let mut assigned = vec![false; elems.len()];
        for i in 0..elems.len() {
            if assigned[i] {
                continue;
            }
            let mut block = vec![elems[i].clone()];
            assigned[i] = true;
            for j in i + 1..elems.len() {
                if !assigned[j] && !apart(elems[i], elems[j]) {
                    block.push(elems[j].clone());
                    assigned[j] = true;
                }
            }
            blocks.push(block);
        }
        // Every pair inside a block must be undistinguished, and no element may
        // be undistinguished from a member of another block.
        for (bi, block) in blocks.iter().enumerate() {
            for a in 1..block.len() {
                for b in a + 1..block.len() {
                    if apart(&block[a], &block[b]) {
                        return Err(LatticeError::NotTransitive {
                            a: block[a].to_string(),
                            b: block[0].to_string(),
                            c: block[b].to_string(),
                        });
                    }
                }
            }
            for y in &block[1..] {
                for x in blocks[bi + 1..].iter().flatten() {
                    if !apart(y, x) {
                        return Err(LatticeError::NotTransitive {
                            a: block[0].to_string(),
                            b: y.to_string(),
                            c: x.to_string(),
                        });
                    }
                }
            }
        }
        Partition::new(blocks)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
