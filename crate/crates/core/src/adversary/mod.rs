//! Topology schedulers. Every strategy sees the full system state before
//! choosing a round's edges and must keep the graph within `p` components;
//! the simulator rejects anything else.

mod greedy;
mod phased;
mod random;

pub use greedy::{greedy_min_phi_topology, EXHAUSTIVE_CUTOFF};
pub use phased::{phased_path_topology, PhasedPathError, PhasedPathParams};
pub use random::random_partition_topology;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::netcore::{RoundTopology, TopologyError};
use crate::protocol::ProcessState;

/// Everything a strategy may look at when choosing round `round`'s edges.
#[derive(Debug, Clone, Copy)]
pub struct AdversaryContext<'a> {
    pub round: u64,
    pub states: &'a [ProcessState],
    pub p: usize,
    /// Potential level the run is analysed at (p, or k for k-agreement).
    pub level: usize,
    pub seed: u64,
}

impl AdversaryContext<'_> {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// Random stream for this round, a pure function of `(seed, round)`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.round);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("scripted schedule is empty")]
    EmptySchedule,
    #[error("scripted topology for round {round} has {got} processes, expected {expected}")]
    ScheduleSize {
        round: u64,
        expected: usize,
        got: usize,
    },
    #[error("phased-path construction ends after round {last}, asked for round {round}")]
    PastHorizon { round: u64, last: u64 },
    #[error("phased-path construction needs {expected} processes, run has {got}")]
    WrongProcessCount { expected: usize, got: usize },
}

pub trait AdversaryStrategy {
    /// Name used in scenario files and trace headers.
    fn name(&self) -> &'static str;

    fn next_topology(&self, ctx: &AdversaryContext<'_>) -> Result<RoundTopology, AdversaryError>;
}

/// The built-in strategies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Adversary {
    /// The path `0 - 1 - ... - (n-1)` every round.
    StaticPath,
    /// A fixed schedule; rounds past its end repeat the last entry.
    Scripted(Vec<RoundTopology>),
    /// Uniformly many components (at most `p`), random spanning trees inside
    /// them plus up to `extra_edges` random chords.
    RandomPartition { extra_edges: usize },
    /// One-step lookahead minimizing the next round's potential.
    GreedyMinPhi { candidate_budget: usize },
    /// Path with one isolated vertex per phase, driving k+1 decisions under
    /// the quiet-period protocol.
    PhasedPath(PhasedPathParams),
}

impl AdversaryStrategy for Adversary {
    fn name(&self) -> &'static str {
        match self {
            Adversary::StaticPath => "static_path",
            Adversary::Scripted(_) => "scripted",
            Adversary::RandomPartition { .. } => "random_partition",
            Adversary::GreedyMinPhi { .. } => "greedy_min_phi",
            Adversary::PhasedPath(_) => "phased_path",
        }
    }

    fn next_topology(&self, ctx: &AdversaryContext<'_>) -> Result<RoundTopology, AdversaryError> {
        let n = ctx.n();
        match self {
            Adversary::StaticPath => Ok(RoundTopology::path(n)?),
            Adversary::Scripted(schedule) => {
                let idx = usize::try_from(ctx.round).unwrap_or(usize::MAX);
                let topo = schedule
                    .get(idx)
                    .or(schedule.last())
                    .ok_or(AdversaryError::EmptySchedule)?;
                if topo.n() != n {
                    return Err(AdversaryError::ScheduleSize {
                        round: ctx.round,
                        expected: n,
                        got: topo.n(),
                    });
                }
                Ok(topo.clone())
            }
            Adversary::RandomPartition { extra_edges } => {
                Ok(random_partition_topology(n, ctx.p, *extra_edges, &mut ctx.rng())?)
            }
            Adversary::GreedyMinPhi { candidate_budget } => Ok(greedy_min_phi_topology(
                ctx.states,
                ctx.p,
                ctx.level,
                *candidate_budget,
                &mut ctx.rng(),
            )?),
            Adversary::PhasedPath(params) => {
                if params.n() != n {
                    return Err(AdversaryError::WrongProcessCount {
                        expected: params.n(),
                        got: n,
                    });
                }
                phased_path_topology(params, ctx.round)
            }
        }
    }
}
