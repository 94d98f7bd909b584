//! Scenario files.
//!
//! One scenario per file, flat `key = value` pairs with an `[adversary]`
//! section and, for sweeps, a `[sweep]` section:
//!
//! ```toml
//! n = 10
//! p = 2
//! protocol = "p_agreement"      # or "k_agreement" (needs epsilon), "unknown_size" (needs quiet_period)
//! inputs = "distinct"           # or "random", or an explicit list
//! seed = 7
//!
//! [adversary]
//! strategy = "greedy_min_phi"
//! candidate_budget = 64
//! ```
//!
//! Unknown keys are errors.

use std::path::Path;

use partagree_core::adversary::PhasedPathParams;
use partagree_core::sim::{Inputs, ProtocolSpec, ScenarioError};
use partagree_core::{Adversary, Epsilon, RoundTopology, Scenario, ScenarioParams, Value};
use serde::Deserialize;

use crate::format::{parse_edges, parse_topology_line};

pub const DEFAULT_CANDIDATE_BUDGET: usize = 64;
pub const DEFAULT_EXTRA_EDGES: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

fn field_error(field: impl Into<String>, reason: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    n: usize,
    p: usize,
    protocol: String,
    epsilon: Option<RawEpsilon>,
    quiet_period: Option<u64>,
    inputs: Option<RawInputs>,
    seed: Option<u64>,
    gamma: Option<u64>,
    horizon: Option<u64>,
    #[serde(default)]
    expect_disagreement: bool,
    adversary: RawAdversary,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEpsilon {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawInputs {
    Named(String),
    Explicit(Vec<Value>),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
enum RawAdversary {
    // braces so that stray keys are rejected
    StaticPath {},
    Scripted {
        schedule: Vec<String>,
    },
    RandomPartition {
        extra_edges: Option<usize>,
    },
    GreedyMinPhi {
        candidate_budget: Option<usize>,
    },
    PhasedPath {
        k: usize,
        halfwidth: usize,
        quiet_period: u64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n: Option<Vec<usize>>,
    p: Option<Vec<usize>>,
    epsilon: Option<Vec<RawEpsilon>>,
    #[serde(default = "one")]
    trials: usize,
}

fn one() -> usize {
    1
}

/// Parameter ranges for a sweep. A missing range keeps the base value; an
/// empty one yields no points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub epsilon: Option<Vec<Epsilon>>,
    pub trials: usize,
}

/// A parsed scenario file, defaults not yet resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioFile {
    pub params: ScenarioParams,
    pub sweep: Option<SweepSpec>,
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        Ok(self.params.clone().resolve()?)
    }
}

fn epsilon(raw: &RawEpsilon, field: &str) -> Result<Epsilon, ConfigError> {
    let text = match raw {
        RawEpsilon::Number(x) => x.to_string(),
        RawEpsilon::Text(s) => s.clone(),
    };
    text.parse().map_err(|e| field_error(field, e))
}

fn scripted_schedule(entries: &[String], n: usize) -> Result<Vec<RoundTopology>, ConfigError> {
    entries
        .iter()
        .enumerate()
        .map(|(idx, entry)| {
            let field = format!("adversary.schedule[{idx}]");
            if entry.trim_start().starts_with("round=") {
                let (round, topo) =
                    parse_topology_line(entry, n).map_err(|e| field_error(&field, e))?;
                if round != idx as u64 {
                    return Err(field_error(&field, format!("expected round={idx}, found round={round}")));
                }
                Ok(topo)
            } else {
                let edges = parse_edges(entry).map_err(|e| field_error(&field, e))?;
                RoundTopology::new(n, edges).map_err(|e| field_error(&field, e))
            }
        })
        .collect()
}

/// Parses scenario text. The result still needs [`ScenarioFile::resolve`].
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ConfigError> {
    let raw: RawFile = toml::from_str(text)?;

    let protocol = match raw.protocol.as_str() {
        "p_agreement" | "k_agreement" | "unknown_size" => raw.protocol.as_str(),
        other => {
            return Err(field_error(
                "protocol",
                format!("unknown protocol {other:?} (expected p_agreement, k_agreement or unknown_size)"),
            ))
        }
    };
    if protocol != "k_agreement" && raw.epsilon.is_some() {
        return Err(field_error("epsilon", "only used by protocol = \"k_agreement\""));
    }
    if protocol != "unknown_size" && raw.quiet_period.is_some() {
        return Err(field_error("quiet_period", "only used by protocol = \"unknown_size\""));
    }
    let protocol = match protocol {
        "p_agreement" => ProtocolSpec::PAgreement,
        "k_agreement" => {
            let eps = raw
                .epsilon
                .as_ref()
                .ok_or_else(|| field_error("epsilon", "required for k_agreement"))?;
            ProtocolSpec::KAgreement(epsilon(eps, "epsilon")?)
        }
        _ => ProtocolSpec::UnknownSize {
            quiet_period: raw
                .quiet_period
                .ok_or_else(|| field_error("quiet_period", "required for unknown_size"))?,
        },
    };

    let adversary = match raw.adversary {
        RawAdversary::StaticPath {} => Adversary::StaticPath,
        RawAdversary::Scripted { schedule } => Adversary::Scripted(scripted_schedule(&schedule, raw.n)?),
        RawAdversary::RandomPartition { extra_edges } => Adversary::RandomPartition {
            extra_edges: extra_edges.unwrap_or(DEFAULT_EXTRA_EDGES),
        },
        RawAdversary::GreedyMinPhi { candidate_budget } => Adversary::GreedyMinPhi {
            candidate_budget: candidate_budget.unwrap_or(DEFAULT_CANDIDATE_BUDGET),
        },
        RawAdversary::PhasedPath {
            k,
            halfwidth,
            quiet_period,
        } => Adversary::PhasedPath(
            PhasedPathParams::new(k, halfwidth, quiet_period).map_err(|e| field_error("adversary", e))?,
        ),
    };

    let inputs = match raw.inputs {
        None => Inputs::Default,
        Some(RawInputs::Named(name)) => match name.as_str() {
            "distinct" => Inputs::Distinct,
            "random" => Inputs::Random,
            other => {
                return Err(field_error(
                    "inputs",
                    format!("unknown generator {other:?} (expected \"distinct\", \"random\" or a list)"),
                ))
            }
        },
        Some(RawInputs::Explicit(values)) => Inputs::Explicit(values),
    };

    let sweep = match raw.sweep {
        None => None,
        Some(s) => Some(SweepSpec {
            n: s.n,
            p: s.p,
            epsilon: s
                .epsilon
                .map(|list| {
                    list.iter()
                        .enumerate()
                        .map(|(i, e)| epsilon(e, &format!("sweep.epsilon[{i}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?,
            trials: s.trials,
        }),
    };

    Ok(ScenarioFile {
        params: ScenarioParams {
            n: raw.n,
            p: raw.p,
            protocol,
            adversary,
            inputs,
            seed: raw.seed.unwrap_or(0),
            gamma: raw.gamma,
            horizon: raw.horizon,
            expect_disagreement: raw.expect_disagreement,
        },
        sweep,
    })
}

/// Parses and resolves scenario text.
pub fn load_scenario_str(text: &str) -> Result<Scenario, ConfigError> {
    parse_scenario(text)?.resolve()
}

pub fn read_scenario_file(path: &Path) -> Result<ScenarioFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Reads, parses and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    read_scenario_file(path)?.resolve()
}
