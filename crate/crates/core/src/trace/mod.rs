//! Failure traces: the LANL reader, the normalized CSV format and a
//! synthetic generator for desk-scale runs.
//!
//! Each trace node stands for one Fog device.

mod lanl;
mod normalized;
mod synth;

pub use lanl::{category_from_lanl, parse_lanl, parse_lanl_str, LanlParse};
pub use normalized::{
    parse_normalized_csv, parse_normalized_str, to_normalized_csv, write_normalized,
    NORMALIZED_HEADER,
};
pub use synth::synthesize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trace contains no failure records")]
    Empty,
    #[error("column `{column}`: {message}")]
    Schema { column: String, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FailureCategory {
    Cpu,
    Memory,
    Network,
    Power,
    Software,
    Unknown,
}

impl FailureCategory {
    pub const ALL: [FailureCategory; 6] = [
        FailureCategory::Cpu,
        FailureCategory::Memory,
        FailureCategory::Network,
        FailureCategory::Power,
        FailureCategory::Software,
        FailureCategory::Unknown,
    ];

    pub fn token(self) -> &'static str {
        match self {
            FailureCategory::Cpu => "CPU",
            FailureCategory::Memory => "MEMORY",
            FailureCategory::Network => "NETWORK",
            FailureCategory::Power => "POWER",
            FailureCategory::Software => "SOFTWARE",
            FailureCategory::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for FailureCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for FailureCategory {
    type Err = String;

    /// Accepts the upper-case tokens of the normalized format only.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FailureCategory::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| format!("unknown category token `{s}`"))
    }
}

/// One unavailability interval `[start_s, end_s)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FailureEvent {
    pub node_id: u32,
    pub start_s: i64,
    pub end_s: i64,
    pub category: FailureCategory,
}

impl FailureEvent {
    pub fn duration_s(&self) -> i64 {
        self.end_s - self.start_s
    }
}

/// Failure events sorted by start time together with the node roster.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceSet {
    events: Vec<FailureEvent>,
    roster: BTreeSet<u32>,
}

impl TraceSet {
    /// Sorts, drops empty intervals and merges overlapping or touching
    /// intervals of the same node (the merged event keeps the category of
    /// the earliest one). The roster is the set of nodes with events.
    pub fn from_events(events: Vec<FailureEvent>) -> Self {
        Self::with_roster(events, BTreeSet::new())
    }

    /// Like [`TraceSet::from_events`] but keeps failure-free nodes listed in
    /// `roster` as well.
    pub fn with_roster(events: Vec<FailureEvent>, mut roster: BTreeSet<u32>) -> Self {
        let mut by_node: BTreeMap<u32, Vec<FailureEvent>> = BTreeMap::new();
        for e in events.into_iter().filter(|e| e.end_s > e.start_s) {
            by_node.entry(e.node_id).or_default().push(e);
        }
        let mut merged = Vec::new();
        for (node, mut evs) in by_node {
            roster.insert(node);
            evs.sort_by_key(|e| (e.start_s, e.end_s));
            let mut cur = evs[0];
            for e in evs.into_iter().skip(1) {
                if e.start_s <= cur.end_s {
                    cur.end_s = cur.end_s.max(e.end_s);
                } else {
                    merged.push(cur);
                    cur = e;
                }
            }
            merged.push(cur);
        }
        merged.sort_by_key(|e| (e.start_s, e.node_id, e.end_s));
        Self {
            events: merged,
            roster,
        }
    }

    pub fn events(&self) -> &[FailureEvent] {
        &self.events
    }

    pub fn roster(&self) -> &BTreeSet<u32> {
        &self.roster
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Earliest failure start.
    pub fn origin(&self) -> Option<i64> {
        self.events.first().map(|e| e.start_s)
    }

    /// Latest failure end minus the origin.
    pub fn span(&self) -> i64 {
        match self.origin() {
            Some(o) => self.events.iter().map(|e| e.end_s).max().unwrap_or(o) - o,
            None => 0,
        }
    }

    pub fn node_events(&self, node: u32) -> impl Iterator<Item = &FailureEvent> {
        self.events.iter().filter(move |e| e.node_id == node)
    }

    pub fn failure_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts: BTreeMap<u32, usize> = self.roster.iter().map(|&n| (n, 0)).collect();
        for e in &self.events {
            *counts.entry(e.node_id).or_default() += 1;
        }
        counts
    }

    pub fn downtime_by_node(&self) -> BTreeMap<u32, i64> {
        let mut down: BTreeMap<u32, i64> = self.roster.iter().map(|&n| (n, 0)).collect();
        for e in &self.events {
            *down.entry(e.node_id).or_default() += e.duration_s();
        }
        down
    }

    /// Keeps the `n` nodes with the most failures (ties: lower node id).
    pub fn top_n_failing(&self, n: usize) -> TraceSet {
        let mut counts: Vec<_> = self.failure_counts().into_iter().collect();
        counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let keep: BTreeSet<u32> = counts.into_iter().take(n).map(|(node, _)| node).collect();
        let events = self
            .events
            .iter()
            .filter(|e| keep.contains(&e.node_id))
            .copied()
            .collect();
        TraceSet::with_roster(events, keep)
    }

    pub fn stats(&self) -> TraceStats {
        let mut by_category = BTreeMap::new();
        for c in FailureCategory::ALL {
            by_category.insert(c.token().to_string(), 0);
        }
        for e in &self.events {
            *by_category.get_mut(e.category.token()).unwrap() += 1;
        }
        let total_downtime_s: i64 = self.events.iter().map(FailureEvent::duration_s).sum();
        let mut gaps = Vec::new();
        for &node in &self.roster {
            let starts: Vec<i64> = self.node_events(node).map(|e| e.start_s).collect();
            gaps.extend(starts.windows(2).map(|w| (w[1] - w[0]) as f64));
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        let repairs: Vec<f64> = self.events.iter().map(|e| e.duration_s() as f64).collect();
        TraceStats {
            events: self.events.len(),
            nodes: self.roster.len(),
            origin_s: self.origin(),
            span_s: self.span(),
            total_downtime_s,
            mean_time_between_failures_s: mean(&gaps),
            mean_time_to_repair_s: mean(&repairs),
            by_category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub events: usize,
    pub nodes: usize,
    pub origin_s: Option<i64>,
    pub span_s: i64,
    pub total_downtime_s: i64,
    pub mean_time_between_failures_s: Option<f64>,
    pub mean_time_to_repair_s: Option<f64>,
    pub by_category: BTreeMap<String, usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(node: u32, s: i64, e: i64) -> FailureEvent {
        FailureEvent {
            node_id: node,
            start_s: s,
            end_s: e,
            category: FailureCategory::Cpu,
        }
    }

    #[test]
    fn overlapping_intervals_merge() {
        let t = TraceSet::from_events(vec![ev(1, 150, 250), ev(1, 100, 200), ev(2, 120, 130)]);
        assert_eq!(t.events(), &[ev(1, 100, 250), ev(2, 120, 130)]);
        assert_eq!(t.roster().len(), 2);
    }

    #[test]
    fn touching_intervals_merge_and_empty_dropped() {
        let t = TraceSet::from_events(vec![ev(1, 100, 200), ev(1, 200, 300), ev(1, 400, 400)]);
        assert_eq!(t.events(), &[ev(1, 100, 300)]);
    }

    #[test]
    fn top_n_keeps_most_failing() {
        let t = TraceSet::from_events(vec![
            ev(1, 0, 1),
            ev(2, 0, 1),
            ev(2, 5, 6),
            ev(3, 0, 1),
            ev(3, 5, 6),
        ]);
        let top = t.top_n_failing(2);
        assert_eq!(top.roster().iter().copied().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(top.len(), 4);
    }

    #[test]
    fn stats_summary() {
        let t = TraceSet::from_events(vec![ev(1, 100, 200), ev(1, 300, 350)]);
        let s = t.stats();
        assert_eq!(s.events, 2);
        assert_eq!(s.span_s, 250);
        assert_eq!(s.total_downtime_s, 150);
        assert_eq!(s.mean_time_between_failures_s, Some(200.0));
        assert_eq!(s.mean_time_to_repair_s, Some(75.0));
        assert_eq!(s.by_category["CPU"], 2);
    }

    #[test]
    fn category_tokens_round_trip() {
        for c in FailureCategory::ALL {
            assert_eq!(c.token().parse::<FailureCategory>().unwrap(), c);
        }
        assert!("cpu".parse::<FailureCategory>().is_err());
    }
}
