//! Parameter sweeps over a base scenario.

use std::fmt::Write;

use partagree_core::sim::{run, ProtocolSpec};
use partagree_core::{Epsilon, ScenarioParams};
use rayon::prelude::*;

use crate::config::SweepSpec;

/// One combination of swept parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub index: usize,
    pub n: usize,
    pub p: usize,
    pub epsilon: Option<Epsilon>,
}

/// Aggregates over the trials of one point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// Agreement target (`p` or `k`); `None` if no trial resolved.
    pub level: Option<usize>,
    pub gamma: Option<u64>,
    pub trials: usize,
    /// Latest first round with `|S| <= level` across trials; `None` if some
    /// trial never got there or nothing ran.
    pub worst_merge_round: Option<u64>,
    pub max_agreement_k: Option<usize>,
    /// Trials that met the scenario's target (inverted for
    /// `expect_disagreement`).
    pub ok_trials: usize,
    /// Hard failures (invalid parameters, aborted runs), one per trial.
    pub failures: Vec<String>,
}

/// Seed for `(point, trial)`. Depends only on the indices, so appending
/// points leaves earlier seeds untouched.
pub fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    base.wrapping_add((point as u64) << 32).wrapping_add(trial as u64)
}

/// Cartesian product of the ranges, in `n`, `p`, `epsilon` order.
pub fn sweep_points(base: &ScenarioParams, spec: &SweepSpec) -> Vec<SweepPoint> {
    let base_eps = match base.protocol {
        ProtocolSpec::KAgreement(e) => Some(e),
        _ => None,
    };
    let ns = spec.n.clone().unwrap_or_else(|| vec![base.n]);
    let ps = spec.p.clone().unwrap_or_else(|| vec![base.p]);
    let eps: Vec<Option<Epsilon>> = match &spec.epsilon {
        Some(list) => list.iter().copied().map(Some).collect(),
        None => vec![base_eps],
    };
    let mut points = Vec::new();
    for &n in &ns {
        for &p in &ps {
            for &epsilon in &eps {
                points.push(SweepPoint {
                    index: points.len(),
                    n,
                    p,
                    epsilon,
                });
            }
        }
    }
    points
}

enum TrialOutcome {
    Ran {
        level: usize,
        gamma: Option<u64>,
        merge: Option<u64>,
        agreement_k: usize,
        ok: bool,
        abort: Option<String>,
    },
    Invalid(String),
}

fn run_trial(base: &ScenarioParams, point: &SweepPoint, trial: usize) -> TrialOutcome {
    let mut params = base.clone();
    params.n = point.n;
    params.p = point.p;
    params.seed = trial_seed(base.seed, point.index, trial);
    if let Some(e) = point.epsilon {
        params.protocol = ProtocolSpec::KAgreement(e);
    }
    let scenario = match params.resolve() {
        Ok(s) => s,
        Err(e) => return TrialOutcome::Invalid(e.to_string()),
    };
    let trace = run(&scenario);
    TrialOutcome::Ran {
        level: scenario.level,
        gamma: scenario.gamma(),
        merge: trace.first_round_within(scenario.level),
        agreement_k: trace.verdict.agreement_k,
        ok: scenario.outcome_ok(&trace),
        abort: trace
            .abort
            .as_ref()
            .map(|a| format!("trial {trial}: aborted at round {}: {}", a.round, a.error)),
    }
}

/// Runs every point `spec.trials` times. Trials run in parallel; rows come
/// back in point order.
pub fn sweep(base: &ScenarioParams, spec: &SweepSpec) -> Vec<SweepRow> {
    let points = sweep_points(base, spec);
    points
        .par_iter()
        .map(|point| {
            let outcomes: Vec<TrialOutcome> = (0..spec.trials)
                .into_par_iter()
                .map(|trial| run_trial(base, point, trial))
                .collect();
            let mut row = SweepRow {
                point: *point,
                level: None,
                gamma: None,
                trials: spec.trials,
                worst_merge_round: None,
                max_agreement_k: None,
                ok_trials: 0,
                failures: Vec::new(),
            };
            let mut merges = Vec::new();
            for (trial, outcome) in outcomes.into_iter().enumerate() {
                match outcome {
                    TrialOutcome::Invalid(reason) => row.failures.push(format!("trial {trial}: {reason}")),
                    TrialOutcome::Ran {
                        level,
                        gamma,
                        merge,
                        agreement_k,
                        ok,
                        abort,
                    } => {
                        row.level = Some(level);
                        row.gamma = gamma;
                        merges.push(merge);
                        row.max_agreement_k = row.max_agreement_k.max(Some(agreement_k));
                        row.ok_trials += usize::from(ok);
                        row.failures.extend(abort);
                    }
                }
            }
            row.worst_merge_round = if merges.is_empty() || merges.contains(&None) {
                None
            } else {
                merges.into_iter().flatten().max()
            };
            row
        })
        .collect()
}

pub const SWEEP_HEADER: &str =
    "point\tn\tp\tepsilon\tlevel\tgamma\ttrials\tworst_merge_round\tmax_agreement_k\tok_trials\tfailures";

fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Tab-separated table with a header line.
pub fn format_table(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{SWEEP_HEADER}").unwrap();
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.point.index,
            r.point.n,
            r.point.p,
            cell(r.point.epsilon),
            cell(r.level),
            cell(r.gamma),
            r.trials,
            cell(r.worst_merge_round),
            cell(r.max_agreement_k),
            r.ok_trials,
            if r.failures.is_empty() {
                "-".to_string()
            } else {
                r.failures.join("; ")
            }
        )
        .unwrap();
    }
    out
}
