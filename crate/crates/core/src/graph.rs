//! Component structure, isolation and degrees of sampled super-graphs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sampler::SuperGraph;

/// Union-find with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct DisjointSetForest {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl DisjointSetForest {
    pub fn new(len: usize) -> Self {
        DisjointSetForest {
            parent: (0..len).collect(),
            rank: vec![0; len],
            components: len,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Representative of the set containing `x`.
    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if they were already one.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    /// Sizes of all sets, largest first.
    pub fn set_sizes(&mut self) -> Vec<usize> {
        let mut count = vec![0usize; self.len()];
        for x in 0..self.len() {
            let r = self.find(x);
            count[r] += 1;
        }
        let mut sizes: Vec<usize> = count.into_iter().filter(|&c| c > 0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Component sizes `L1 >= L2 >= ...` and the number of isolated super-vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub sizes_desc: Vec<usize>,
    pub isolated_count: usize,
}

impl ComponentSummary {
    /// Size of the `j`-th largest component (1-based), 0 if there are fewer.
    pub fn largest(&self, j: usize) -> usize {
        assert!(j >= 1);
        self.sizes_desc.get(j - 1).copied().unwrap_or(0)
    }

    pub fn n_super(&self) -> usize {
        self.sizes_desc.iter().sum()
    }

    pub fn is_connected(&self) -> bool {
        self.sizes_desc.len() == 1
    }
}

pub fn connected_components(g: &SuperGraph) -> ComponentSummary {
    let mut forest = DisjointSetForest::new(g.n_super());
    for &(u, v) in g.edges() {
        forest.union(u, v);
    }
    ComponentSummary {
        sizes_desc: forest.set_sizes(),
        isolated_count: isolated_count(g),
    }
}

/// True iff the graph has exactly one component. The single-vertex graph is
/// connected.
pub fn is_connected(g: &SuperGraph) -> bool {
    let mut forest = DisjointSetForest::new(g.n_super());
    for &(u, v) in g.edges() {
        forest.union(u, v);
        if forest.component_count() == 1 {
            return true;
        }
    }
    forest.component_count() == 1
}

/// Number of degree-0 super-vertices.
pub fn isolated_count(g: &SuperGraph) -> usize {
    let mut touched = vec![false; g.n_super()];
    for &(u, v) in g.edges() {
        touched[u] = true;
        touched[v] = true;
    }
    touched.iter().filter(|&&t| !t).count()
}

/// Sparse histogram `degree -> number of super-vertices with that degree`.
pub fn degree_histogram(g: &SuperGraph) -> BTreeMap<usize, u64> {
    let mut hist = BTreeMap::new();
    for d in g.degrees() {
        *hist.entry(d).or_insert(0) += 1;
    }
    hist
}

/// `L1 / N`.
pub fn largest_component_fraction(g: &SuperGraph) -> f64 {
    let summary = connected_components(g);
    summary.largest(1) as f64 / g.n_super() as f64
}
