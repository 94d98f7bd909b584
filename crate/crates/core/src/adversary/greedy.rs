use alloc::vec::Vec;

use rand::Rng;

use super::random::random_partition_topology;
use crate::analysis::{all_topologies, potential};
use crate::netcore::{validate_p_partitioned, RoundTopology, TopologyError};
use crate::protocol::{ProcessState, Value};

/// Up to this many processes the greedy strategy scores every graph.
pub const EXHAUSTIVE_CUTOFF: usize = 4;

// Minima after one flooding round; decided processes keep theirs.
fn predicted_mins(states: &[ProcessState], topo: &RoundTopology) -> Vec<Value> {
    let mut next: Vec<Value> = states.iter().map(|s| s.current_min).collect();
    for &(i, j) in topo.edges() {
        if !states[i].is_decided() {
            next[i] = next[i].min(states[j].current_min);
        }
        if !states[j].is_decided() {
            next[j] = next[j].min(states[i].current_min);
        }
    }
    next
}

// Each block becomes a path in the given order.
fn blocks_to_topology(n: usize, blocks: &[&[usize]]) -> Result<RoundTopology, TopologyError> {
    RoundTopology::new(
        n,
        blocks
            .iter()
            .flat_map(|b| b.windows(2).map(|w| (w[0], w[1]))),
    )
}

// Paths through processes sorted by value, cut into at most p blocks along
// a few natural boundaries.
fn structured_candidates(
    states: &[ProcessState],
    p: usize,
) -> Result<Vec<RoundTopology>, TopologyError> {
    let n = states.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (states[v].current_min, v));
    // start index of each value class within `order`
    let class_starts: Vec<usize> = (0..n)
        .filter(|&i| i == 0 || states[order[i]].current_min != states[order[i - 1]].current_min)
        .collect();

    let mut out = Vec::new();
    for groups in 1..=p.min(n) {
        let cut_sets: [Vec<usize>; 3] = [
            // singletons of the smallest values split off
            (1..groups).collect(),
            // whole smallest classes split off
            class_starts.iter().copied().skip(1).take(groups - 1).collect(),
            // whole largest classes split off
            class_starts.iter().rev().copied().take(groups - 1).filter(|&c| c > 0).collect(),
        ];
        for mut cuts in cut_sets {
            cuts.sort_unstable();
            cuts.dedup();
            let mut blocks: Vec<&[usize]> = Vec::new();
            let mut start = 0;
            for &c in cuts.iter().chain(core::iter::once(&n)) {
                blocks.push(&order[start..c]);
                start = c;
            }
            out.push(blocks_to_topology(n, &blocks)?);
        }
    }
    Ok(out)
}

/// Picks the legal topology (at most `p` components) whose round leaves the
/// smallest potential at `level`. Graphs on up to [`EXHAUSTIVE_CUTOFF`]
/// processes are searched exhaustively; larger ones are sampled from a few
/// sorted-path layouts plus `candidate_budget` random partitions. Ties go to
/// the lexicographically smallest edge list.
pub fn greedy_min_phi_topology<R: Rng + ?Sized>(
    states: &[ProcessState],
    p: usize,
    level: usize,
    candidate_budget: usize,
    rng: &mut R,
) -> Result<RoundTopology, TopologyError> {
    let n = states.len();
    if n == 0 {
        return Err(TopologyError::Empty);
    }
    let candidates: Vec<RoundTopology> = if n <= EXHAUSTIVE_CUTOFF {
        all_topologies(n).collect()
    } else {
        let mut c = structured_candidates(states, p)?;
        for _ in 0..candidate_budget {
            c.push(random_partition_topology(n, p, rng.gen_range(0..=n), rng)?);
        }
        c
    };

    let mut best: Option<(u64, RoundTopology)> = None;
    for topo in candidates {
        if validate_p_partitioned(&topo, p).is_err() {
            continue;
        }
        let score = potential(&predicted_mins(states, &topo), level);
        let better = match &best {
            None => true,
            Some((s, t)) => (score, topo.edges()) < (*s, t.edges()),
        };
        if better {
            best = Some((score, topo));
        }
    }
    // the path always has a single component, so p >= 1 leaves a candidate
    match best {
        Some((_, t)) => Ok(t),
        None => RoundTopology::path(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::count_components;
    use crate::protocol::ProtocolVariant;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn states(mins: &[Value]) -> Vec<ProcessState> {
        mins.iter()
            .map(|&m| ProcessState::new(m, ProtocolVariant::KnownBound { gamma: 10 }))
            .collect()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(3)
    }

    #[test]
    fn isolates_the_minimum_holder() {
        let t = greedy_min_phi_topology(&states(&[1, 2, 3]), 2, 2, 0, &mut rng()).unwrap();
        assert_eq!(t.edges(), &[(1, 2)]);
    }

    #[test]
    fn forced_single_edge() {
        let t = greedy_min_phi_topology(&states(&[1, 2]), 1, 1, 0, &mut rng()).unwrap();
        assert_eq!(t.edges(), &[(0, 1)]);
    }

    #[test]
    fn agreed_states_accept_any_legal_graph() {
        let s = states(&[5, 5, 5, 5]);
        for p in 1..=4 {
            let t = greedy_min_phi_topology(&s, p, p, 0, &mut rng()).unwrap();
            assert!(count_components(&t).count <= p);
        }
    }

    // Exhaustive minimization, written against the raw edge masks.
    fn oracle_min_increase(mins: &[Value], p: usize, level: usize) -> u64 {
        let n = mins.len();
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut best = u64::MAX;
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = (0..pairs.len()).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]).collect();
            let topo = RoundTopology::new(n, edges.iter().copied()).unwrap();
            if count_components(&topo).count > p {
                continue;
            }
            let mut next = mins.to_vec();
            for &(i, j) in &edges {
                next[i] = next[i].min(mins[j]);
                next[j] = next[j].min(mins[i]);
            }
            best = best.min(potential(&next, level) - potential(mins, level));
        }
        best
    }

    #[test]
    fn exhaustive_matches_oracle_on_small_graphs() {
        let vectors: [&[Value]; 6] = [
            &[1, 2, 3, 4],
            &[4, 3, 2, 1],
            &[1, 1, 2, 3],
            &[2, 1, 2, 1],
            &[3, 1, 2],
            &[2, 2, 1, 3],
        ];
        for mins in vectors {
            for p in 1..=mins.len() {
                for level in p..=p + 1 {
                    let s = states(mins);
                    let t = greedy_min_phi_topology(&s, p, level, 0, &mut rng()).unwrap();
                    let got = potential(&predicted_mins(&s, &t), level) - potential(mins, level);
                    assert_eq!(got, oracle_min_increase(mins, p, level), "{mins:?} p={p} level={level}");
                }
            }
        }
    }

    #[test]
    fn sampled_candidates_are_legal() {
        let s = states(&[9, 3, 7, 1, 5, 2, 8, 6, 4, 0]);
        for p in 1..=4 {
            let t = greedy_min_phi_topology(&s, p, p, 16, &mut rng()).unwrap();
            assert!(count_components(&t).count <= p);
        }
    }

    #[test]
    fn decided_processes_do_not_move() {
        let mut s = states(&[1, 2]);
        s[1].decided = Some(2);
        assert_eq!(predicted_mins(&s, &RoundTopology::path(2).unwrap()), [1, 2]);
    }
}
