//! The phased-path schedule that forces `k + 1` distinct decisions when
//! processes do not know the network size.
//!
//! Processes form a path of `k + 1` segments of `2t + 1` processes each;
//! segment `i` (1-based) holds input `i`. Phase `i` lasts `T` rounds and
//! isolates the middle vertex `a_i` of segment `i`, bridging its two path
//! neighbours so the rest stays a single path. Phase `i` starts at round
//! `(i - 1)T < t`, so no smaller value has travelled the `t + 1` hops to
//! `a_i` yet; after `T` silent rounds `a_i` decides `i`.

use alloc::vec::Vec;

use super::AdversaryError;
use crate::netcore::RoundTopology;
use crate::protocol::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedPathParams {
    k: usize,
    segment_halfwidth: usize,
    quiet_period: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PhasedPathError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("segment half-width t must be at least 1")]
    ZeroHalfwidth,
    #[error("quiet period T must be at least 1")]
    ZeroQuietPeriod,
    #[error("segment half-width t = {t} must exceed k*T = {bound}")]
    HalfwidthTooSmall { t: usize, bound: u64 },
}

impl PhasedPathParams {
    pub fn new(k: usize, segment_halfwidth: usize, quiet_period: u64) -> Result<Self, PhasedPathError> {
        if k == 0 {
            return Err(PhasedPathError::ZeroK);
        }
        if segment_halfwidth == 0 {
            return Err(PhasedPathError::ZeroHalfwidth);
        }
        if quiet_period == 0 {
            return Err(PhasedPathError::ZeroQuietPeriod);
        }
        let bound = k as u64 * quiet_period;
        if segment_halfwidth as u64 <= bound {
            return Err(PhasedPathError::HalfwidthTooSmall {
                t: segment_halfwidth,
                bound,
            });
        }
        Ok(PhasedPathParams {
            k,
            segment_halfwidth,
            quiet_period,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn segment_halfwidth(&self) -> usize {
        self.segment_halfwidth
    }

    pub fn quiet_period(&self) -> u64 {
        self.quiet_period
    }

    pub fn segment_len(&self) -> usize {
        2 * self.segment_halfwidth + 1
    }

    /// `(k + 1)(2t + 1)`.
    pub fn n(&self) -> usize {
        (self.k + 1) * self.segment_len()
    }

    /// Rounds in the whole construction, `(k + 1)T`.
    pub fn horizon(&self) -> u64 {
        (self.k as u64 + 1) * self.quiet_period
    }

    /// Phase (1-based) that `round` belongs to.
    pub fn phase(&self, round: u64) -> usize {
        (round / self.quiet_period) as usize + 1
    }

    /// `a_i`: the middle process of segment `phase`.
    pub fn isolated_vertex(&self, phase: usize) -> usize {
        (phase - 1) * self.segment_len() + self.segment_halfwidth
    }

    /// Segment `i` holds value `i`.
    pub fn inputs(&self) -> Vec<Value> {
        (0..self.n())
            .map(|v| (v / self.segment_len()) as Value + 1)
            .collect()
    }
}

/// Round `round`'s graph: the path `P` with `a_i` cut out and bridged.
pub fn phased_path_topology(
    params: &PhasedPathParams,
    round: u64,
) -> Result<RoundTopology, AdversaryError> {
    if round >= params.horizon() {
        return Err(AdversaryError::PastHorizon {
            round,
            last: params.horizon() - 1,
        });
    }
    let a = params.isolated_vertex(params.phase(round));
    let n = params.n();
    let path = (1..n).map(|j| (j - 1, j)).filter(|&(i, j)| i != a && j != a);
    Ok(RoundTopology::new(n, path.chain([(a - 1, a + 1)]))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::count_components;

    #[test]
    fn first_phase_isolates_segment_one_middle() {
        let params = PhasedPathParams::new(1, 2, 1).unwrap();
        assert_eq!(params.n(), 10);
        let t = phased_path_topology(&params, 0).unwrap();
        assert_eq!(
            t.edges(),
            &[(0, 1), (1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9)]
        );
        let t = phased_path_topology(&params, 1).unwrap();
        assert!(t.contains(6, 8) && !t.contains(6, 7) && !t.contains(7, 8));
        assert_eq!(count_components(&t).labels[7], 1);
    }

    #[test]
    fn exactly_two_components_every_round() {
        let params = PhasedPathParams::new(2, 5, 2).unwrap();
        for round in 0..params.horizon() {
            let t = phased_path_topology(&params, round).unwrap();
            let c = count_components(&t);
            assert_eq!(c.count, 2);
            assert_eq!(c.sizes().iter().min(), Some(&1));
        }
        assert_eq!(
            phased_path_topology(&params, 6),
            Err(AdversaryError::PastHorizon { round: 6, last: 5 })
        );
    }

    #[test]
    fn parameter_checks() {
        assert_eq!(
            PhasedPathParams::new(2, 4, 2),
            Err(PhasedPathError::HalfwidthTooSmall { t: 4, bound: 4 })
        );
        assert_eq!(PhasedPathParams::new(0, 4, 2), Err(PhasedPathError::ZeroK));
        assert_eq!(PhasedPathParams::new(1, 4, 0), Err(PhasedPathError::ZeroQuietPeriod));
        let p = PhasedPathParams::new(2, 5, 2).unwrap();
        assert_eq!(p.n(), 33);
        assert_eq!(p.horizon(), 6);
        assert_eq!(
            [1, 2, 3].map(|i| p.isolated_vertex(i)),
            [5, 16, 27]
        );
        let inputs = p.inputs();
        assert_eq!((inputs[10], inputs[11], inputs[32]), (1, 2, 3));
    }
}
