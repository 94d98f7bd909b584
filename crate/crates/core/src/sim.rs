//! Scenarios and the lockstep execution loop.
//!
//! Each round the adversary picks a topology from the full state, the
//! topology is checked against `p`, every process broadcasts its minimum and
//! every process steps on the multiset of values its neighbours sent.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{Adversary, AdversaryContext, AdversaryError, AdversaryStrategy};
use crate::analysis::{
    check_round, current_mins, potential, quotient_graph, value_classes, verdict, LemmaViolation,
    Verdict,
};
use crate::netcore::{count_components, validate_p_partitioned, PartitionViolation, RoundTopology};
use crate::protocol::{
    budget_k_agreement, budget_p_agreement, outgoing_message, step, Epsilon, ProcessState,
    ProtocolVariant, Value,
};

/// Which protocol a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolSpec {
    /// Known bound, budget for p-agreement.
    PAgreement,
    /// Known bound, budget for `ceil((1 + eps) p)`-agreement.
    KAgreement(Epsilon),
    /// Unknown size: decide after `quiet_period` silent rounds.
    UnknownSize { quiet_period: u64 },
}

impl ProtocolSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::PAgreement => "p_agreement",
            ProtocolSpec::KAgreement(_) => "k_agreement",
            ProtocolSpec::UnknownSize { .. } => "unknown_size",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inputs {
    /// `1..=n` for most runs; segment values for the phased-path construction.
    Default,
    /// `1..=n` in index order.
    Distinct,
    /// Uniform in `1..=n`, drawn from the scenario seed.
    Random,
    Explicit(Vec<Value>),
}

/// Unresolved scenario description; [`ScenarioParams::resolve`] fills in
/// defaults and validates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioParams {
    pub n: usize,
    pub p: usize,
    pub protocol: ProtocolSpec,
    pub adversary: Adversary,
    pub inputs: Inputs,
    pub seed: u64,
    pub gamma: Option<u64>,
    pub horizon: Option<u64>,
    pub expect_disagreement: bool,
}

impl ScenarioParams {
    pub fn new(n: usize, p: usize, protocol: ProtocolSpec, adversary: Adversary) -> Self {
        ScenarioParams {
            n,
            p,
            protocol,
            adversary,
            inputs: Inputs::Default,
            seed: 0,
            gamma: None,
            horizon: None,
            expect_disagreement: false,
        }
    }

    pub fn resolve(self) -> Result<Scenario, ScenarioError> {
        Scenario::resolve(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct ScenarioError {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError {
        field,
        reason: reason.into(),
    }
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub p: usize,
    pub protocol: ProtocolSpec,
    pub variant: ProtocolVariant,
    /// Level of the potential the run is analysed at, and the agreement
    /// target: p, k, or the phased-path k.
    pub level: usize,
    /// Budget from the closed-form formulas, if the protocol has one.
    pub computed_gamma: Option<u64>,
    /// Whether `gamma` was set explicitly to something else.
    pub budget_override: bool,
    pub adversary: Adversary,
    pub inputs: Vec<Value>,
    pub seed: u64,
    pub horizon: u64,
    pub expect_disagreement: bool,
}

fn random_inputs(n: usize, seed: u64) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // stream 0.. is used by the adversary rounds
    rng.set_stream(u64::MAX);
    (0..n).map(|_| rng.gen_range(1..=n as Value)).collect()
}

impl Scenario {
    fn resolve(params: ScenarioParams) -> Result<Scenario, ScenarioError> {
        let ScenarioParams {
            n,
            p,
            protocol,
            adversary,
            inputs,
            seed,
            gamma,
            horizon,
            expect_disagreement,
        } = params;
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if p == 0 {
            return Err(invalid("p", "must be at least 1"));
        }

        let phased = match &adversary {
            Adversary::PhasedPath(pp) => Some(*pp),
            _ => None,
        };

        let (computed_gamma, level) = match protocol {
            ProtocolSpec::PAgreement => (Some(budget_p_agreement(n as u64, p as u64)), p),
            ProtocolSpec::KAgreement(eps) => {
                let b = budget_k_agreement(n as u64, p as u64, eps);
                (Some(b.gamma), b.k as usize)
            }
            ProtocolSpec::UnknownSize { quiet_period } => {
                if quiet_period == 0 {
                    return Err(invalid("quiet_period", "must be at least 1"));
                }
                (None, phased.map_or(p, |pp| pp.k()))
            }
        };

        let (variant, budget_override) = match (protocol, computed_gamma) {
            (ProtocolSpec::UnknownSize { quiet_period }, _) => {
                if gamma.is_some() {
                    return Err(invalid("gamma", "only applies to known-bound protocols"));
                }
                (ProtocolVariant::UnknownSize { quiet_period }, false)
            }
            (_, Some(formula)) => {
                let g = gamma.unwrap_or(formula);
                (ProtocolVariant::KnownBound { gamma: g }, g != formula)
            }
            (_, None) => unreachable!("known-bound protocols always have a budget"),
        };

        let horizon = match (variant, horizon) {
            (ProtocolVariant::KnownBound { gamma }, h) => {
                let h = h.unwrap_or(gamma);
                if h < gamma {
                    return Err(invalid(
                        "horizon",
                        format!("{h} is below the round budget {gamma}"),
                    ));
                }
                h
            }
            (ProtocolVariant::UnknownSize { .. }, Some(h)) => h,
            (ProtocolVariant::UnknownSize { .. }, None) => match phased {
                Some(pp) => pp.horizon(),
                None => {
                    return Err(invalid(
                        "horizon",
                        "required for unknown_size runs outside the phased-path construction",
                    ))
                }
            },
        };

        if let Some(pp) = phased {
            match variant {
                ProtocolVariant::UnknownSize { quiet_period } if quiet_period == pp.quiet_period() => {}
                ProtocolVariant::UnknownSize { quiet_period } => {
                    return Err(invalid(
                        "adversary.quiet_period",
                        format!(
                            "{} does not match the protocol quiet_period {quiet_period}",
                            pp.quiet_period()
                        ),
                    ))
                }
                ProtocolVariant::KnownBound { .. } => {
                    return Err(invalid("protocol", "phased_path requires unknown_size"))
                }
            }
            if n != pp.n() {
                return Err(invalid(
                    "n",
                    format!("phased_path with these parameters needs n = (k+1)(2t+1) = {}", pp.n()),
                ));
            }
            if p < 2 {
                return Err(invalid("p", "phased_path produces 2 components, needs p >= 2"));
            }
            if horizon > pp.horizon() {
                return Err(invalid(
                    "horizon",
                    format!("phased_path construction lasts {} rounds", pp.horizon()),
                ));
            }
        }

        if let Adversary::Scripted(schedule) = &adversary {
            if schedule.is_empty() {
                return Err(invalid("adversary.schedule", "must list at least one round"));
            }
            if let Some(bad) = schedule.iter().position(|t| t.n() != n) {
                return Err(invalid(
                    "adversary.schedule",
                    format!("round {bad} has {} processes, expected {n}", schedule[bad].n()),
                ));
            }
        }

        let inputs = match inputs {
            Inputs::Default => match phased {
                Some(pp) => pp.inputs(),
                None => (1..=n as Value).collect(),
            },
            Inputs::Distinct => (1..=n as Value).collect(),
            Inputs::Random => random_inputs(n, seed),
            Inputs::Explicit(v) => {
                if v.len() != n {
                    return Err(invalid(
                        "inputs",
                        format!("{} values given for n = {n}", v.len()),
                    ));
                }
                v
            }
        };

        Ok(Scenario {
            n,
            p,
            protocol,
            variant,
            level,
            computed_gamma,
            budget_override,
            adversary,
            inputs,
            seed,
            horizon,
            expect_disagreement,
        })
    }

    /// Round budget actually used, for known-bound runs.
    pub fn gamma(&self) -> Option<u64> {
        match self.variant {
            ProtocolVariant::KnownBound { gamma } => Some(gamma),
            ProtocolVariant::UnknownSize { .. } => None,
        }
    }

    /// Exit status semantics: did the run meet its target, inverted for
    /// scenarios that are meant to disagree?
    pub fn outcome_ok(&self, trace: &ExecutionTrace) -> bool {
        let solved = trace.abort.is_none() && trace.verdict.solves(self.level);
        solved != self.expect_disagreement
    }
}

/// State at the end of round `round` (round 0: initial snapshot).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u64,
    /// The topology of this round; `None` for the initial snapshot.
    pub topology: Option<RoundTopology>,
    pub mins: Vec<Value>,
    pub decided: Vec<Option<Value>>,
    /// `S(t)`, ascending.
    pub distinct: Vec<Value>,
    pub components: Option<usize>,
    /// `Φ` at the scenario level.
    pub phi: u64,
    pub dphi: Option<i64>,
    /// Quotient-graph bound for the increase this round.
    pub quotient_bound: Option<u64>,
}

impl RoundRecord {
    fn snapshot(states: &[ProcessState], level: usize) -> Self {
        let mins = current_mins(states);
        RoundRecord {
            round: 0,
            topology: None,
            distinct: value_classes(&mins).distinct_values,
            phi: potential(&mins, level),
            decided: states.iter().map(|s| s.decided).collect(),
            mins,
            components: None,
            dphi: None,
            quotient_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Partition(#[from] PartitionViolation),
}

/// Why and where a run stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunAbort {
    /// 1-based round whose topology was rejected.
    pub round: u64,
    pub error: RunError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    /// Initial snapshot plus one record per executed round.
    pub records: Vec<RoundRecord>,
    pub final_states: Vec<ProcessState>,
    pub verdict: Verdict,
    pub abort: Option<RunAbort>,
}

impl ExecutionTrace {
    pub fn rounds_executed(&self) -> u64 {
        self.records.len() as u64 - 1
    }

    /// First recorded round with at most `k` distinct minima.
    pub fn first_round_within(&self, k: usize) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.distinct.len() <= k)
            .map(|r| r.round)
    }
}

/// Runs `scenario` against its own adversary.
pub fn run(scenario: &Scenario) -> ExecutionTrace {
    run_with(scenario, &scenario.adversary)
}

/// Runs `scenario` with an arbitrary strategy in place of its adversary.
pub fn run_with<A: AdversaryStrategy + ?Sized>(scenario: &Scenario, adversary: &A) -> ExecutionTrace {
    let level = scenario.level;
    let mut states: Vec<ProcessState> = scenario
        .inputs
        .iter()
        .map(|&v| ProcessState::new(v, scenario.variant))
        .collect();
    let mut records = alloc::vec![RoundRecord::snapshot(&states, level)];
    let mut abort = None;

    for round in 0..scenario.horizon {
        if states.iter().all(ProcessState::is_decided) {
            break;
        }
        let ctx = AdversaryContext {
            round,
            states: &states,
            p: scenario.p,
            level,
            seed: scenario.seed,
        };
        let topo = match adversary
            .next_topology(&ctx)
            .map_err(RunError::from)
            .and_then(|t| {
                validate_p_partitioned(&t, scenario.p)?;
                Ok(t)
            }) {
            Ok(t) => t,
            Err(error) => {
                abort = Some(RunAbort {
                    round: round + 1,
                    error,
                });
                break;
            }
        };

        let messages: Vec<Value> = states.iter().map(outgoing_message).collect();
        let adjacency = topo.adjacency();
        let mut received = Vec::new();
        let next: Vec<ProcessState> = states
            .iter()
            .zip(&adjacency)
            .map(|(s, neighbours)| {
                received.clear();
                received.extend(neighbours.iter().map(|&u| messages[u]));
                step(s, &received, scenario.variant, round)
            })
            .collect();

        let before = current_mins(&states);
        let prev_phi = records.last().map(|r| r.phi).unwrap_or_default();
        let mut record = RoundRecord::snapshot(&next, level);
        record.round = round + 1;
        record.components = Some(count_components(&topo).count);
        record.dphi = Some(record.phi as i64 - prev_phi as i64);
        record.quotient_bound = Some(quotient_graph(&before, &topo, level).phi_increase_lower_bound());
        record.topology = Some(topo);
        records.push(record);
        states = next;
    }

    let rounds = records.len() as u64 - 1;
    ExecutionTrace {
        verdict: verdict(&states, rounds),
        records,
        final_states: states,
        abort,
    }
}

/// Agreement, validity and termination for a finished trace.
pub fn check_run(trace: &ExecutionTrace) -> Verdict {
    verdict(&trace.final_states, trace.rounds_executed())
}

/// Runs the per-round lemma checks over every consecutive record pair in
/// which no process had decided yet.
pub fn check_trace_lemmas(records: &[RoundRecord], p: usize, level: usize) -> Result<(), LemmaViolation> {
    for pair in records.windows(2) {
        let (before, after) = (&pair[0], &pair[1]);
        if before.decided.iter().any(Option::is_some) {
            continue;
        }
        if let Some(topo) = &after.topology {
            check_round(after.round, &before.mins, topo, &after.mins, p, level)?;
        }
    }
    Ok(())
}
