//! Per-round communication graphs and the p-partition check.
//!
//! Processes are dense indices `0..n`. Edges are undirected and stored in
//! canonical form `(i, j)` with `i < j`, sorted, without duplicates.

use alloc::vec;
use alloc::vec::Vec;

/// Structural problems with a topology.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("topology must have at least one process")]
    Empty,
    #[error("self-loop on process {0}")]
    SelfLoop(usize),
    #[error("edge ({i}, {j}) has an endpoint outside 0..{n}")]
    OutOfRange { i: usize, j: usize, n: usize },
}

/// The edge set `E(t)` used for one synchronous round.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoundTopology {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl RoundTopology {
    /// Builds a topology, normalizing endpoint order and dropping duplicate
    /// edges.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(TopologyError::OutOfRange { i: a, j: b, n });
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            canon.push(if a < b { (a, b) } else { (b, a) });
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(RoundTopology { n, edges: canon })
    }

    /// No edges at all: every process is isolated.
    pub fn empty(n: usize) -> Result<Self, TopologyError> {
        Self::new(n, core::iter::empty())
    }

    /// The path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self, TopologyError> {
        Self::new(n, (1..n).map(|j| (j - 1, j)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical, ascending edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let e = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&e).is_ok()
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Relabels process `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, TopologyError> {
        Self::new(self.n, self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))
    }
}

/// Connected components of a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// Component id per process, assigned in order of each component's
    /// smallest member.
    pub labels: Vec<usize>,
    pub count: usize,
}

impl ComponentLabeling {
    /// Sizes of each component, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Labels the connected components of `topo`. Isolated processes are
/// singleton components.
pub fn count_components(topo: &RoundTopology) -> ComponentLabeling {
    let mut sets = DisjointSets::new(topo.n);
    for &(i, j) in &topo.edges {
        sets.union(i, j);
    }
    let mut root_label = vec![usize::MAX; topo.n];
    let mut labels = Vec::with_capacity(topo.n);
    let mut count = 0;
    for v in 0..topo.n {
        let root = sets.find(v);
        if root_label[root] == usize::MAX {
            root_label[root] = count;
            count += 1;
        }
        labels.push(root_label[root]);
    }
    ComponentLabeling { labels, count }
}

/// A topology with more components than the partition bound allows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("topology has {count} components, more than the allowed {p}")]
pub struct PartitionViolation {
    pub count: usize,
    pub p: usize,
}

/// Succeeds iff `topo` has at most `p` connected components.
pub fn validate_p_partitioned(topo: &RoundTopology, p: usize) -> Result<(), PartitionViolation> {
    let count = count_components(topo).count;
    if count <= p {
        Ok(())
    } else {
        Err(PartitionViolation { count, p })
    }
}
