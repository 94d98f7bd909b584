use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::netcore::{RoundTopology, TopologyError};

/// A random graph with between 1 and `min(p, n)` components: processes are
/// shuffled into nonempty groups, each group gets a random spanning tree, and
/// `extra_edges` further random pairs are added inside groups.
pub fn random_partition_topology<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    extra_edges: usize,
    rng: &mut R,
) -> Result<RoundTopology, TopologyError> {
    if n == 0 {
        return Err(TopologyError::Empty);
    }
    let groups = rng.gen_range(1..=p.clamp(1, n));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut cuts: Vec<usize> = index::sample(rng, n - 1, groups - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);

    let mut edges = Vec::with_capacity(n + extra_edges);
    let mut start = 0;
    let mut blocks = Vec::with_capacity(groups);
    for end in cuts {
        let block = &order[start..end];
        for i in 1..block.len() {
            edges.push((block[rng.gen_range(0..i)], block[i]));
        }
        blocks.push(block);
        start = end;
    }
    for _ in 0..extra_edges {
        let block = blocks[rng.gen_range(0..blocks.len())];
        if block.len() >= 2 {
            let picked: Vec<_> = block.choose_multiple(rng, 2).copied().collect();
            edges.push((picked[0], picked[1]));
        }
    }
    RoundTopology::new(n, edges)
}
