//! Exhaustive worst-case search for tiny instances.
//!
//! Deliberately shares no code with the simulator: graphs are edge bitmasks,
//! components come from bitmask reachability and flooding is recomputed
//! here.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::protocol::Value;

/// Largest process count the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_N: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("exhaustive search is limited to n <= {BRUTE_FORCE_MAX_N}, got {0}")]
    TooLarge(usize),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("p must be at least 1")]
    ZeroP,
    #[error("some adversary schedule needs more than {0} rounds")]
    HorizonExceeded(u64),
}

/// Neighborhood bitmask per vertex (closed: includes the vertex itself).
type Closed = Vec<u8>;

fn legal_graphs(n: usize, p: usize) -> Vec<Closed> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut closed: Closed = (0..n).map(|v| 1u8 << v).collect();
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                closed[i] |= 1 << j;
                closed[j] |= 1 << i;
            }
        }
        if components(&closed) <= p {
            out.push(closed);
        }
    }
    out
}

fn components(closed: &Closed) -> usize {
    let n = closed.len();
    let mut unseen: u8 = ((1u16 << n) - 1) as u8;
    let mut count = 0;
    while unseen != 0 {
        let start = unseen.trailing_zeros() as usize;
        let mut reach: u8 = 1 << start;
        loop {
            let grown = (0..n)
                .filter(|v| reach >> v & 1 == 1)
                .fold(reach, |acc, v| acc | closed[v]);
            if grown == reach {
                break;
            }
            reach = grown;
        }
        unseen &= !reach;
        count += 1;
    }
    count
}

fn distinct(mins: &[Value]) -> usize {
    let mut v = mins.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

struct Search<'a> {
    graphs: &'a [Closed],
    p: usize,
    horizon: u64,
    memo: BTreeMap<Vec<Value>, u64>,
}

impl Search<'_> {
    // Rounds the adversary can delay |S| <= p from `mins`, at most `budget`.
    fn worst(&mut self, mins: &[Value], budget: u64) -> Result<u64, OracleError> {
        if distinct(mins) <= self.p {
            return Ok(0);
        }
        if let Some(&w) = self.memo.get(mins) {
            return Ok(w);
        }
        if budget == 0 {
            return Err(OracleError::HorizonExceeded(self.horizon));
        }
        let mut best = 0;
        for g in self.graphs {
            let next: Vec<Value> = (0..mins.len())
                .map(|v| {
                    (0..mins.len())
                        .filter(|u| g[v] >> u & 1 == 1)
                        .map(|u| mins[u])
                        .min()
                        .unwrap()
                })
                .collect();
            best = best.max(1 + self.worst(&next, budget - 1)?);
        }
        self.memo.insert(mins.to_vec(), best);
        Ok(best)
    }
}

/// Maximum over all adversary schedules with at most `p` components per
/// round of the first round `t` at which at most `p` distinct minima remain.
pub fn brute_force_worst_rounds(
    n: usize,
    p: usize,
    inputs: &[Value],
    horizon: u64,
) -> Result<u64, OracleError> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge(n));
    }
    if inputs.len() != n {
        return Err(OracleError::InputCount {
            expected: n,
            got: inputs.len(),
        });
    }
    if p == 0 {
        return Err(OracleError::ZeroP);
    }
    if n == 0 {
        return Ok(0);
    }
    let graphs = legal_graphs(n, p);
    let mut search = Search {
        graphs: &graphs,
        p,
        horizon,
        memo: BTreeMap::new(),
    };
    search.worst(inputs, horizon)
}
