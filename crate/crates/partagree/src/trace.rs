//! Line-oriented execution traces.
//!
//! ```text
//! # partagree trace v1
//! scenario n=4 p=2 level=2 protocol=p_agreement gamma=3 budget_override=false adversary=static_path horizon=3 seed=0 expect_disagreement=false
//! inputs=1,2,3,4
//! t=0 phi=3 dphi=- S=1,2,3,4 comps=- qbound=- mins=1,2,3,4 decided=-,-,-,- edges=
//! t=1 phi=5 dphi=2 S=1,2,3 comps=1 qbound=2 mins=1,1,2,3 decided=-,-,-,- edges=0-1,1-2,2-3
//! ...
//! verdict agreement_k=1 W=1 validity=true termination=true rounds=3
//! ```
//!
//! Record `t` is the state after `t` rounds; its `edges` are the topology of
//! round `t`, `dphi` is the change in `Φ` over that round and `qbound` the
//! quotient-graph bound for it. Output is byte-stable for a given scenario.

use std::collections::BTreeMap;
use std::fmt::Write;

use partagree_core::analysis::{potential, quotient_graph, value_classes, verdict, Verdict};
use partagree_core::sim::{check_trace_lemmas, ExecutionTrace, ProtocolSpec, RoundRecord, RunError};
use partagree_core::{count_components, AdversaryStrategy, ProcessState, ProtocolVariant, RoundTopology, Scenario, Value};

use crate::format::{
    format_decisions, format_edges, format_values, parse_decisions, parse_edges, parse_values,
};

pub const TRACE_MAGIC: &str = "# partagree trace v1";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn scenario_header(s: &Scenario) -> String {
    let mut out = format!("scenario n={} p={} level={} protocol={}", s.n, s.p, s.level, s.protocol.name());
    match (s.protocol, s.variant) {
        (ProtocolSpec::KAgreement(eps), _) => write!(out, " epsilon={eps}").unwrap(),
        (_, ProtocolVariant::UnknownSize { quiet_period }) => {
            write!(out, " quiet_period={quiet_period}").unwrap()
        }
        _ => {}
    }
    write!(
        out,
        " gamma={} budget_override={} adversary={} horizon={} seed={} expect_disagreement={}",
        opt(s.gamma()),
        s.budget_override,
        s.adversary.name(),
        s.horizon,
        s.seed,
        s.expect_disagreement
    )
    .unwrap();
    out
}

pub fn format_record(r: &RoundRecord) -> String {
    format!(
        "t={} phi={} dphi={} S={} comps={} qbound={} mins={} decided={} edges={}",
        r.round,
        r.phi,
        opt(r.dphi),
        format_values(&r.distinct),
        opt(r.components),
        opt(r.quotient_bound),
        format_values(&r.mins),
        format_decisions(&r.decided),
        r.topology.as_ref().map(format_edges).unwrap_or_default(),
    )
}

pub fn format_verdict(v: &Verdict) -> String {
    format!(
        "verdict agreement_k={} W={} validity={} termination={} rounds={}",
        v.agreement_k,
        format_values(&v.decision_set),
        v.validity_ok,
        v.termination_ok,
        v.rounds_used
    )
}

fn abort_reason(e: &RunError) -> String {
    e.to_string().replace('\n', " ")
}

/// The full trace text, newline-terminated.
pub fn format_trace(scenario: &Scenario, trace: &ExecutionTrace) -> String {
    let mut out = String::new();
    writeln!(out, "{TRACE_MAGIC}").unwrap();
    writeln!(out, "{}", scenario_header(scenario)).unwrap();
    writeln!(out, "inputs={}", format_values(&scenario.inputs)).unwrap();
    for r in &trace.records {
        writeln!(out, "{}", format_record(r)).unwrap();
    }
    if let Some(abort) = &trace.abort {
        writeln!(out, "abort round={} reason={}", abort.round, abort_reason(&abort.error)).unwrap();
    }
    writeln!(out, "{}", format_verdict(&trace.verdict)).unwrap();
    out
}

/// A trace read back from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTrace {
    pub header: BTreeMap<String, String>,
    pub inputs: Vec<Value>,
    pub records: Vec<RoundRecord>,
    pub aborted: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

fn fields(line: &str) -> BTreeMap<&str, &str> {
    line.split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

fn parse_opt<T: std::str::FromStr>(v: &str) -> Result<Option<T>, String> {
    match v {
        "-" => Ok(None),
        v => v.parse().map(Some).map_err(|_| format!("bad number {v:?}")),
    }
}

fn parse_record(line: &str, n: usize) -> Result<RoundRecord, String> {
    let f = fields(line);
    let get = |k: &str| f.get(k).copied().ok_or_else(|| format!("missing field {k}="));
    let num = |k: &str| -> Result<u64, String> {
        get(k)?.parse().map_err(|_| format!("bad {k}="))
    };
    let round = num("t")?;
    let edges = parse_edges(get("edges")?).map_err(|e| e.to_string())?;
    let topology = if round == 0 {
        if !edges.is_empty() {
            return Err("round 0 has no topology".into());
        }
        None
    } else {
        Some(RoundTopology::new(n, edges).map_err(|e| e.to_string())?)
    };
    Ok(RoundRecord {
        round,
        topology,
        mins: parse_values(get("mins")?).map_err(|e| e.to_string())?,
        decided: parse_decisions(get("decided")?).map_err(|e| e.to_string())?,
        distinct: parse_values(get("S")?).map_err(|e| e.to_string())?,
        components: parse_opt(get("comps")?)?,
        phi: num("phi")?,
        dphi: parse_opt(get("dphi")?)?,
        quotient_bound: parse_opt(get("qbound")?)?,
    })
}

fn parse_bool(v: &str) -> Result<bool, String> {
    v.parse().map_err(|_| format!("bad boolean {v:?}"))
}

pub fn parse_trace(text: &str) -> Result<ParsedTrace, TraceParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, reason: String| TraceParseError { line, reason };

    match lines.next() {
        Some((_, TRACE_MAGIC)) => {}
        _ => return Err(err(1, format!("expected {TRACE_MAGIC:?}"))),
    }
    let (no, header_line) = lines.next().ok_or_else(|| err(2, "missing scenario line".into()))?;
    let header_rest = header_line
        .strip_prefix("scenario ")
        .ok_or_else(|| err(no, "expected `scenario ...`".into()))?;
    let header: BTreeMap<String, String> = fields(header_rest)
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let n: usize = header
        .get("n")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| err(no, "scenario line lacks n=".into()))?;

    let (no, inputs_line) = lines.next().ok_or_else(|| err(3, "missing inputs line".into()))?;
    let inputs = inputs_line
        .strip_prefix("inputs=")
        .ok_or_else(|| err(no, "expected `inputs=`".into()))
        .and_then(|v| parse_values(v).map_err(|e| err(no, e.to_string())))?;

    let mut records = Vec::new();
    let mut aborted = false;
    for (no, line) in lines {
        if line.starts_with("t=") {
            records.push(parse_record(line, n).map_err(|r| err(no, r))?);
        } else if line.starts_with("abort ") {
            aborted = true;
        } else if let Some(rest) = line.strip_prefix("verdict ") {
            let f = fields(rest);
            let get = |k: &str| f.get(k).copied().ok_or_else(|| err(no, format!("missing {k}=")));
            let verdict = Verdict {
                agreement_k: get("agreement_k")?.parse().map_err(|_| err(no, "bad agreement_k".into()))?,
                decision_set: parse_values(get("W")?).map_err(|e| err(no, e.to_string()))?,
                validity_ok: parse_bool(get("validity")?).map_err(|r| err(no, r))?,
                termination_ok: parse_bool(get("termination")?).map_err(|r| err(no, r))?,
                rounds_used: get("rounds")?.parse().map_err(|_| err(no, "bad rounds".into()))?,
            };
            return Ok(ParsedTrace {
                header,
                inputs,
                records,
                aborted,
                verdict,
            });
        } else if !line.trim().is_empty() {
            return Err(err(no, format!("unexpected line {line:?}")));
        }
    }
    Err(err(text.lines().count(), "missing verdict line".into()))
}

/// Re-derives every recorded quantity from the recorded minima and edges,
/// then runs the per-round lemma checks. Returns the problems found.
pub fn verify_trace(t: &ParsedTrace) -> Vec<String> {
    let mut issues = Vec::new();
    let num = |k: &str| t.header.get(k).and_then(|v| v.parse::<usize>().ok());
    let (Some(n), Some(p), Some(level)) = (num("n"), num("p"), num("level")) else {
        return vec!["scenario line lacks n=, p= or level=".into()];
    };
    if t.inputs.len() != n {
        issues.push(format!("{} inputs for n = {n}", t.inputs.len()));
        return issues;
    }
    let Some(first) = t.records.first() else {
        issues.push("no round records".into());
        return issues;
    };
    if first.round != 0 || first.mins != t.inputs {
        issues.push("round-0 record does not match the inputs".into());
    }
    if first.phi != potential(&t.inputs, level) {
        issues.push(format!(
            "round-0 phi={} but the inputs give {}",
            first.phi,
            potential(&t.inputs, level)
        ));
    }

    for (idx, r) in t.records.iter().enumerate() {
        let tag = format!("t={}", r.round);
        if r.round != idx as u64 {
            issues.push(format!("{tag}: expected t={idx}"));
        }
        if r.mins.len() != n || r.decided.len() != n {
            issues.push(format!("{tag}: wrong number of processes"));
            continue;
        }
        if r.distinct != value_classes(&r.mins).distinct_values {
            issues.push(format!("{tag}: S does not match mins"));
        }
        if r.phi != potential(&r.mins, level) {
            issues.push(format!("{tag}: phi={} but mins give {}", r.phi, potential(&r.mins, level)));
        }
        if idx == 0 {
            continue;
        }
        let prev = &t.records[idx - 1];
        if prev.mins.len() != n || prev.decided.len() != n {
            continue;
        }
        let Some(topo) = &r.topology else {
            issues.push(format!("{tag}: missing topology"));
            continue;
        };
        let comps = count_components(topo).count;
        if r.components != Some(comps) {
            issues.push(format!("{tag}: comps={} but edges give {comps}", opt(r.components)));
        }
        if comps > p {
            issues.push(format!("{tag}: {comps} components exceed p = {p}"));
        }
        if r.dphi != Some(r.phi as i64 - prev.phi as i64) {
            issues.push(format!("{tag}: dphi does not match consecutive phi values"));
        }
        let bound = quotient_graph(&prev.mins, topo, level).phi_increase_lower_bound();
        if r.quotient_bound != Some(bound) {
            issues.push(format!("{tag}: qbound={} but the quotient graph gives {bound}", opt(r.quotient_bound)));
        }
        for v in 0..n {
            if r.mins[v] > prev.mins[v] {
                issues.push(format!("{tag}: process {v} minimum increased"));
            }
            if prev.decided[v].is_some() && r.decided[v] != prev.decided[v] {
                issues.push(format!("{tag}: process {v} changed its decision"));
            }
        }
    }

    if let Err(v) = check_trace_lemmas(&t.records, p, level) {
        issues.push(v.to_string());
    }

    if let Some(last) = t.records.last() {
        if last.mins.len() == n && last.decided.len() == n {
            let states: Vec<ProcessState> = (0..n)
                .map(|v| ProcessState {
                    input: t.inputs[v],
                    current_min: last.mins[v],
                    decided: last.decided[v],
                    quiet_rounds: 0,
                })
                .collect();
            let expected = verdict(&states, t.records.len() as u64 - 1);
            if expected != t.verdict {
                issues.push(format!(
                    "verdict line disagrees with final record: expected `{}`",
                    format_verdict(&expected)
                ));
            }
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_scenario_str;
    use partagree_core::run;

    const SMALL: &str = r#"
n = 4
p = 2
protocol = "p_agreement"

[adversary]
strategy = "static_path"
"#;

    #[test]
    fn doc_example_matches() {
        let s = load_scenario_str(SMALL).unwrap();
        let text = format_trace(&s, &run(&s));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "scenario n=4 p=2 level=2 protocol=p_agreement gamma=3 budget_override=false adversary=static_path horizon=3 seed=0 expect_disagreement=false");
        assert_eq!(lines[3], "t=0 phi=3 dphi=- S=1,2,3,4 comps=- qbound=- mins=1,2,3,4 decided=-,-,-,- edges=");
        assert_eq!(lines[4], "t=1 phi=5 dphi=2 S=1,2,3 comps=1 qbound=2 mins=1,1,2,3 decided=-,-,-,- edges=0-1,1-2,2-3");
        assert_eq!(lines.last().unwrap(), &"verdict agreement_k=1 W=1 validity=true termination=true rounds=3");
    }

    #[test]
    fn parse_and_verify_clean_trace() {
        let s = load_scenario_str(SMALL).unwrap();
        let trace = run(&s);
        let parsed = parse_trace(&format_trace(&s, &trace)).unwrap();
        assert_eq!(parsed.records, trace.records);
        assert_eq!(parsed.verdict, trace.verdict);
        assert_eq!(verify_trace(&parsed), Vec::<String>::new());
    }

    #[test]
    fn tampering_is_detected() {
        let s = load_scenario_str(SMALL).unwrap();
        let text = format_trace(&s, &run(&s));
        let tampered = text.replace("t=1 phi=5", "t=1 phi=6");
        let issues = verify_trace(&parse_trace(&tampered).unwrap());
        assert!(issues.iter().any(|i| i.contains("phi=6")), "{issues:?}");

        let tampered = text.replace("agreement_k=1 W=1", "agreement_k=2 W=1,2");
        let issues = verify_trace(&parse_trace(&tampered).unwrap());
        assert!(issues.iter().any(|i| i.contains("verdict")), "{issues:?}");
    }

    #[test]
    fn malformed_traces_rejected() {
        assert!(parse_trace("").is_err());
        assert!(parse_trace("hello\n").is_err());
        let e = parse_trace(&format!("{TRACE_MAGIC}\nscenario n=2 p=1 level=1\ninputs=1,2\nt=0 phi=x\n")).unwrap_err();
        assert_eq!(e.line, 4);
    }
}
