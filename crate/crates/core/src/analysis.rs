//! Potential-function analytics over the vector of current minima.
//!
//! For a round `t`, `S(t)` is the set of distinct minima, `V_i(t)` the
//! processes holding the `i`-th smallest of them and `A_i(t)` the number of
//! processes holding a value at most `s_i(t)`. At level `l` the potential is
//! `Φ = l|V_1| + (l-1)|V_2| + ... + |V_l|`; every class past index `l` is the
//! residual class and weighs nothing.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::netcore::{count_components, RoundTopology};
use crate::protocol::{ProcessState, Value};

pub fn current_mins(states: &[ProcessState]) -> Vec<Value> {
    states.iter().map(|s| s.current_min).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueClasses {
    /// `S(t)`, ascending.
    pub distinct_values: Vec<Value>,
    /// `|V_i(t)|`, aligned with `distinct_values`.
    pub class_sizes: Vec<usize>,
    /// `A_i(t)`.
    pub prefix_counts: Vec<usize>,
}

impl ValueClasses {
    pub fn len(&self) -> usize {
        self.distinct_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinct_values.is_empty()
    }

    /// Index (0-based) of the class holding `value`.
    pub fn class_of(&self, value: Value) -> Option<usize> {
        self.distinct_values.binary_search(&value).ok()
    }

    /// `A_i` with `i` 1-based, saturating at `n` once `i > |S|`.
    pub fn prefix(&self, i: usize) -> usize {
        match i {
            0 => 0,
            i => self.prefix_counts[i.min(self.len()) - 1],
        }
    }

    /// Number of processes in the residual class `V_{level+1}`.
    pub fn residual_size(&self, level: usize) -> usize {
        self.prefix(self.len()) - self.prefix(level)
    }
}

pub fn value_classes(mins: &[Value]) -> ValueClasses {
    let mut sorted = mins.to_vec();
    sorted.sort_unstable();
    let mut distinct_values = Vec::new();
    let mut class_sizes: Vec<usize> = Vec::new();
    for v in sorted {
        if distinct_values.last() == Some(&v) {
            *class_sizes.last_mut().unwrap() += 1;
        } else {
            distinct_values.push(v);
            class_sizes.push(1);
        }
    }
    let prefix_counts = class_sizes
        .iter()
        .scan(0, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    ValueClasses {
        distinct_values,
        class_sizes,
        prefix_counts,
    }
}

/// `Φ` at `level`.
pub fn potential(mins: &[Value], level: usize) -> u64 {
    value_classes(mins)
        .class_sizes
        .iter()
        .take(level)
        .enumerate()
        .map(|(i, &size)| ((level - i) * size) as u64)
        .sum()
}

/// Largest `Φ` at level `p` while more than `p` values survive:
/// `p(n - p) + p(p - 1)/2`.
pub fn potential_ceiling(n: usize, p: usize) -> u64 {
    let (n, p) = (n as u64, p as u64);
    p * n.saturating_sub(p) + p * p.saturating_sub(1) / 2
}

/// Graph on the value classes `V_1..V_{level+1}` of one round. Vertex `i`
/// is class `V_{i+1}`; the last vertex is the residual class when more than
/// `level` values exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    pub vertex_count: usize,
    /// Class pairs `(a, b)`, `a < b`, joined by some edge of the topology.
    pub edges: Vec<(usize, usize)>,
}

impl QuotientGraph {
    pub fn component_count(&self) -> usize {
        // vertex_count >= 1 whenever the topology has a process
        let topo = RoundTopology::new(self.vertex_count, self.edges.iter().copied())
            .expect("quotient edges index existing classes");
        count_components(&topo).count
    }

    /// Guaranteed `Φ` increase for the round: the sum over components of
    /// (classes in the component - 1).
    pub fn phi_increase_lower_bound(&self) -> u64 {
        (self.vertex_count - self.component_count()) as u64
    }
}

pub fn quotient_graph(mins: &[Value], topo: &RoundTopology, level: usize) -> QuotientGraph {
    assert_eq!(mins.len(), topo.n(), "one minimum per process");
    let classes = value_classes(mins);
    let class_index = |v: Value| classes.class_of(v).unwrap().min(level);
    let vertex_count = classes.len().min(level + 1);
    let edges: BTreeSet<(usize, usize)> = topo
        .edges()
        .iter()
        .filter_map(|&(i, j)| {
            let (a, b) = (class_index(mins[i]), class_index(mins[j]));
            match a.cmp(&b) {
                core::cmp::Ordering::Less => Some((a, b)),
                core::cmp::Ordering::Greater => Some((b, a)),
                core::cmp::Ordering::Equal => None,
            }
        })
        .collect();
    QuotientGraph {
        vertex_count,
        edges: edges.into_iter().collect(),
    }
}

/// Mins after one round of flooding over `topo`, ignoring decisions.
pub fn flood_once(mins: &[Value], topo: &RoundTopology) -> Vec<Value> {
    let mut next = mins.to_vec();
    for &(i, j) in topo.edges() {
        next[i] = next[i].min(mins[j]);
        next[j] = next[j].min(mins[i]);
    }
    next
}

/// Outcome of the agreement, validity and termination checks for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// `|W|`, the number of distinct decided values.
    pub agreement_k: usize,
    /// `W`, ascending.
    pub decision_set: Vec<Value>,
    pub validity_ok: bool,
    pub termination_ok: bool,
    pub rounds_used: u64,
}

impl Verdict {
    /// Whether the run solved `k`-agreement.
    pub fn solves(&self, k: usize) -> bool {
        self.agreement_k <= k && self.validity_ok && self.termination_ok
    }
}

/// Judges final process states. Undecided processes only fail termination.
pub fn verdict(final_states: &[ProcessState], rounds_used: u64) -> Verdict {
    let inputs: BTreeSet<Value> = final_states.iter().map(|s| s.input).collect();
    let decided: BTreeSet<Value> = final_states.iter().filter_map(|s| s.decided).collect();
    Verdict {
        agreement_k: decided.len(),
        validity_ok: decided.is_subset(&inputs),
        termination_ok: final_states.iter().all(ProcessState::is_decided),
        decision_set: decided.into_iter().collect(),
        rounds_used,
    }
}

/// A failed per-round lemma check.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LemmaViolation {
    #[error("round {round}: |S| = {distinct} > p = {p} but Φ went {before} -> {after}")]
    NoProgress {
        round: u64,
        distinct: usize,
        p: usize,
        before: u64,
        after: u64,
    },
    #[error("round {round}: A_{index} decreased from {before} to {after}")]
    PrefixDecrease {
        round: u64,
        index: usize,
        before: usize,
        after: usize,
    },
    #[error("round {round}: value {value} appeared in S(t+1) but not in S(t)")]
    SetGrew { round: u64, value: Value },
    #[error("round {round}: Φ at level {level} rose by {realized}, below the quotient bound {bound}")]
    BelowQuotientBound {
        round: u64,
        level: usize,
        realized: i64,
        bound: u64,
    },
    #[error("round {round}: Φ = {phi} exceeds the ceiling {ceiling} while |S| > p")]
    AboveCeiling { round: u64, phi: u64, ceiling: u64 },
}

/// Checks one round's transition `before -> after` over `topo`: progress and
/// the potential ceiling at level `p`, prefix monotonicity, set shrinkage,
/// and the quotient-graph bound at `level` (any level `>= p`).
///
/// The progress lemmas assume every process that heard a smaller value
/// adopted it, which holds until processes decide.
pub fn check_round(
    round: u64,
    before: &[Value],
    topo: &RoundTopology,
    after: &[Value],
    p: usize,
    level: usize,
) -> Result<(), LemmaViolation> {
    let n = before.len();
    let cb = value_classes(before);
    let ca = value_classes(after);

    if let Some(&value) = ca
        .distinct_values
        .iter()
        .find(|v| cb.class_of(**v).is_none())
    {
        return Err(LemmaViolation::SetGrew { round, value });
    }

    // A_i(t) for i up to the larger of the two levels, indexed against S(t)
    let upto = p.max(level).max(cb.len());
    for i in 1..=upto {
        let (b, a) = (cb.prefix(i), ca.prefix(i));
        if a < b {
            return Err(LemmaViolation::PrefixDecrease {
                round,
                index: i,
                before: b,
                after: a,
            });
        }
    }

    if cb.len() > p {
        let (phi_b, phi_a) = (potential(before, p), potential(after, p));
        if phi_a < phi_b + 1 {
            return Err(LemmaViolation::NoProgress {
                round,
                distinct: cb.len(),
                p,
                before: phi_b,
                after: phi_a,
            });
        }
        let ceiling = potential_ceiling(n, p);
        if phi_b > ceiling {
            return Err(LemmaViolation::AboveCeiling {
                round,
                phi: phi_b,
                ceiling,
            });
        }
    }

    let bound = quotient_graph(before, topo, level).phi_increase_lower_bound();
    let realized = potential(after, level) as i64 - potential(before, level) as i64;
    if realized < bound as i64 {
        return Err(LemmaViolation::BelowQuotientBound {
            round,
            level,
            realized,
            bound,
        });
    }
    Ok(())
}

/// All simple graphs on `n <= 6` vertices, as canonical topologies.
pub(crate) fn all_topologies(n: usize) -> impl Iterator<Item = RoundTopology> {
    assert!((1..=6).contains(&n));
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    (0u32..(1 << m)).map(move |mask| {
        let edges = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]);
        RoundTopology::new(n, edges).unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::validate_p_partitioned;
    use proptest::prelude::*;

    #[test]
    fn classes_of_small_vector() {
        let c = value_classes(&[1, 1, 2, 3]);
        assert_eq!(c.distinct_values, [1, 2, 3]);
        assert_eq!(c.class_sizes, [2, 1, 1]);
        assert_eq!(c.prefix_counts, [2, 3, 4]);
        assert_eq!(c.residual_size(2), 1);
        assert_eq!(c.prefix(5), 4);

        let c = value_classes(&[7, 7, 7]);
        assert_eq!((c.class_sizes.as_slice(), c.prefix_counts.as_slice()), (&[3][..], &[3][..]));
        assert_eq!(value_classes(&[3, 1, 2]).class_sizes, [1, 1, 1]);
    }

    #[test]
    fn potential_values() {
        assert_eq!(potential(&[1, 1, 2, 3], 2), 5);
        assert_eq!(potential(&[4; 6], 3), 18);
        assert_eq!(potential(&[5, 1, 4, 2, 3], 3), 6);
        assert_eq!(potential_ceiling(10, 2), 17);
    }

    #[test]
    fn potential_is_sum_of_prefixes() {
        let mins = [3, 1, 4, 1, 5, 9, 2, 6];
        let c = value_classes(&mins);
        for level in 1..10 {
            let sum: usize = (1..=level).map(|i| c.prefix(i)).sum();
            assert_eq!(potential(&mins, level), sum as u64);
        }
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_graph(&[2, 2], &RoundTopology::path(2).unwrap(), 1);
        assert_eq!((q.vertex_count, q.edges.len()), (1, 0));

        let q = quotient_graph(&[1, 2], &RoundTopology::path(2).unwrap(), 1);
        assert_eq!(q.vertex_count, 2);
        assert_eq!(q.edges, [(0, 1)]);
        assert_eq!(q.phi_increase_lower_bound(), 1);

        let q = quotient_graph(&[1, 1, 2, 3, 3], &RoundTopology::path(5).unwrap(), 3);
        assert_eq!(q.vertex_count, 3);
        assert_eq!(q.component_count(), 1);
        assert_eq!(q.phi_increase_lower_bound(), 2);

        // no edges: classes stay apart, no guaranteed increase
        let q = quotient_graph(&[1, 2], &RoundTopology::empty(2).unwrap(), 1);
        assert_eq!(q.phi_increase_lower_bound(), 0);
    }

    #[test]
    fn residual_class_collapses() {
        // level 1: classes {1} and residual {2,3}; edge 1-2 is inside the residual
        let topo = RoundTopology::new(3, [(1, 2)]).unwrap();
        let q = quotient_graph(&[1, 2, 3], &topo, 1);
        assert_eq!(q.vertex_count, 2);
        assert!(q.edges.is_empty());
    }

    #[test]
    fn verdict_fields() {
        use crate::protocol::ProtocolVariant;
        let v = ProtocolVariant::KnownBound { gamma: 0 };
        let v1 = verdict(&[ProcessState::new(4, v)], 0);
        assert_eq!(v1.agreement_k, 1);
        assert_eq!(v1.decision_set, [4]);
        assert!(v1.solves(1));

        let mut a = ProcessState::new(3, ProtocolVariant::UnknownSize { quiet_period: 1 });
        let b = a;
        a.decided = Some(9);
        let v2 = verdict(&[a, b], 5);
        assert!(!v2.validity_ok);
        assert!(!v2.termination_ok);
        assert_eq!(v2.rounds_used, 5);
    }

    fn arb_round() -> impl Strategy<Value = (Vec<Value>, RoundTopology, usize, usize)> {
        (1usize..=6).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let m = pairs.len();
            (
                prop::collection::vec(0i64..6, n),
                0u32..(1 << m),
                1usize..=n,
                0usize..4,
            )
                .prop_map(move |(mins, mask, p, extra)| {
                    let edges = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| pairs[b]);
                    let topo = RoundTopology::new(n, edges).unwrap();
                    (mins, topo, p, p + extra)
                })
        })
    }

    proptest! {
        #[test]
        fn flooding_rounds_satisfy_lemmas((mins, topo, p, level) in arb_round()) {
            prop_assume!(validate_p_partitioned(&topo, p).is_ok());
            let after = flood_once(&mins, &topo);
            prop_assert_eq!(check_round(0, &mins, &topo, &after, p, level), Ok(()));
        }

        #[test]
        fn quotient_has_no_more_components_than_topology((mins, topo, _p, level) in arb_round()) {
            let q = quotient_graph(&mins, &topo, level);
            prop_assert!(q.component_count() <= count_components(&topo).count);
        }
    }

    #[test]
    fn full_class_set_meets_k_plus_one_minus_p() {
        // every 6-vertex graph with <= p components, all-distinct mins
        let mins = [6, 2, 5, 1, 4, 3];
        for topo in all_topologies(6) {
            let c = count_components(&topo).count;
            for p in c..=3 {
                for k in p..=4 {
                    let q = quotient_graph(&mins, &topo, k);
                    assert_eq!(q.vertex_count, k + 1);
                    assert!(q.phi_increase_lower_bound() >= (k + 1 - p) as u64);
                }
            }
        }
    }
}
