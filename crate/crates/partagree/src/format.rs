//! Text forms of edge sets and value lists shared by traces and scenario
//! files.
//!
//! A topology line reads `round=<t> edges=<i-j,i-j,...>` with pairs in
//! ascending order; an empty edge set is `edges=`.

use std::fmt::Write;

use partagree_core::{RoundTopology, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad edge {0:?}, expected `i-j`")]
    Edge(String),
    #[error("bad value {0:?}")]
    Value(String),
    #[error("bad topology line {0:?}, expected `round=<t> edges=<i-j,...>`")]
    Line(String),
    #[error(transparent)]
    Topology(#[from] partagree_core::netcore::TopologyError),
}

pub fn format_edges(topo: &RoundTopology) -> String {
    let mut out = String::new();
    for (k, (i, j)) in topo.edges().iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        write!(out, "{i}-{j}").unwrap();
    }
    out
}

pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>, FormatError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|pair| {
            let bad = || FormatError::Edge(pair.to_string());
            let (a, b) = pair.trim().split_once('-').ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn format_topology_line(round: u64, topo: &RoundTopology) -> String {
    format!("round={round} edges={}", format_edges(topo))
}

/// Parses a topology line for a network of `n` processes.
pub fn parse_topology_line(line: &str, n: usize) -> Result<(u64, RoundTopology), FormatError> {
    let bad = || FormatError::Line(line.to_string());
    let rest = line.trim().strip_prefix("round=").ok_or_else(bad)?;
    let (round, edges) = rest.split_once(' ').ok_or_else(bad)?;
    let edges = edges.trim_start().strip_prefix("edges=").ok_or_else(bad)?;
    let round = round.parse().map_err(|_| bad())?;
    Ok((round, RoundTopology::new(n, parse_edges(edges)?)?))
}

pub fn format_values(values: &[Value]) -> String {
    join(values.iter())
}

pub fn parse_values(text: &str) -> Result<Vec<Value>, FormatError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|v| v.trim().parse().map_err(|_| FormatError::Value(v.to_string())))
        .collect()
}

/// Decisions, with `-` for undecided processes.
pub fn format_decisions(decided: &[Option<Value>]) -> String {
    let mut out = String::new();
    for (k, d) in decided.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        match d {
            Some(v) => write!(out, "{v}").unwrap(),
            None => out.push('-'),
        }
    }
    out
}

pub fn parse_decisions(text: &str) -> Result<Vec<Option<Value>>, FormatError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|v| match v.trim() {
            "-" => Ok(None),
            v => v.parse().map(Some).map_err(|_| FormatError::Value(v.to_string())),
        })
        .collect()
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    let mut out = String::new();
    for (k, item) in items.enumerate() {
        if k > 0 {
            out.push(',');
        }
        write!(out, "{item}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_line_is_sorted() {
        let t = RoundTopology::new(5, [(3, 4), (1, 0), (2, 1)]).unwrap();
        assert_eq!(format_topology_line(7, &t), "round=7 edges=0-1,1-2,3-4");
        let empty = RoundTopology::empty(3).unwrap();
        assert_eq!(format_topology_line(0, &empty), "round=0 edges=");
    }

    #[test]
    fn topology_line_parses_back() {
        let (r, t) = parse_topology_line("round=3 edges=2-0,0-1", 3).unwrap();
        assert_eq!(r, 3);
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);
        let (_, t) = parse_topology_line("round=0 edges=", 2).unwrap();
        assert!(t.edges().is_empty());
        assert!(parse_topology_line("edges=0-1", 2).is_err());
        assert!(matches!(
            parse_topology_line("round=0 edges=0-5", 2),
            Err(FormatError::Topology(_))
        ));
        assert!(matches!(parse_edges("0:1"), Err(FormatError::Edge(_))));
    }

    #[test]
    fn decisions_roundtrip() {
        let d = [Some(3), None, Some(-1)];
        assert_eq!(format_decisions(&d), "3,-,-1");
        assert_eq!(parse_decisions("3,-,-1").unwrap(), d);
        assert_eq!(parse_values("1, 2,3").unwrap(), [1, 2, 3]);
    }
}
