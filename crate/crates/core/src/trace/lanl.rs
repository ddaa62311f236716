//! Reader for LANL failure records.
//!
//! Accepted layout: comma-separated rows `node, start, end, category`.
//! Blank lines and lines starting with `#` are ignored. An optional header
//! row (first field not an integer) may reorder the columns; recognised
//! names are listed in [`NODE_COLUMNS`], [`START_COLUMNS`], [`END_COLUMNS`]
//! and [`CATEGORY_COLUMNS`] (case-insensitive). Times are either integer
//! epoch seconds or LANL-style `MM/DD/YYYY HH:MM` (two-digit years are
//! accepted) read as UTC. Category strings map through
//! [`category_from_lanl`].

use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use log::warn;

use super::{FailureCategory, FailureEvent, TraceError, TraceSet};

pub const NODE_COLUMNS: &[&str] = &["nodenum", "node", "node_id", "node number"];
pub const START_COLUMNS: &[&str] = &["prob started", "start", "start_s", "failure start"];
pub const END_COLUMNS: &[&str] = &["prob fixed", "end", "end_s", "failure end"];
pub const CATEGORY_COLUMNS: &[&str] = &["category", "failure category", "cause", "root cause"];

/// Result of reading a LANL file: the normalized trace and the number of
/// rows dropped because they ended at or before their start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanlParse {
    pub traces: TraceSet,
    pub dropped: usize,
}

/// Lookup from LANL cause strings (lower-cased, trimmed) to categories.
/// Anything not listed is `UNKNOWN`.
const CATEGORY_TABLE: &[(&str, FailureCategory)] = &[
    ("cpu", FailureCategory::Cpu),
    ("processor", FailureCategory::Cpu),
    ("hardware: cpu", FailureCategory::Cpu),
    ("memory", FailureCategory::Memory),
    ("memory dimm", FailureCategory::Memory),
    ("dimm", FailureCategory::Memory),
    ("hardware: memory dimm", FailureCategory::Memory),
    ("network", FailureCategory::Network),
    ("interconnect", FailureCategory::Network),
    ("switch", FailureCategory::Network),
    ("nic", FailureCategory::Network),
    ("power", FailureCategory::Power),
    ("power supply", FailureCategory::Power),
    ("power outage", FailureCategory::Power),
    ("facilities", FailureCategory::Power),
    ("ups", FailureCategory::Power),
    ("hardware: power supply", FailureCategory::Power),
    ("software", FailureCategory::Software),
    ("os", FailureCategory::Software),
    ("kernel", FailureCategory::Software),
    ("filesystem", FailureCategory::Software),
    ("parallel file system", FailureCategory::Software),
    ("unknown", FailureCategory::Unknown),
    ("undetermined", FailureCategory::Unknown),
];

pub fn category_from_lanl(raw: &str) -> FailureCategory {
    let key = raw.trim().to_ascii_lowercase();
    CATEGORY_TABLE
        .iter()
        .find(|(name, _)| *name == key)
        .map(|&(_, c)| c)
        .unwrap_or(FailureCategory::Unknown)
}

pub fn parse_lanl(path: &Path) -> Result<LanlParse, TraceError> {
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_lanl_str(&text)
}

fn parse_time(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    ["%m/%d/%Y %H:%M", "%m/%d/%y %H:%M", "%m/%d/%Y %H:%M:%S"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(raw, fmt).ok())
        .map(|dt| dt.and_utc().timestamp())
}

fn find_column(header: &[String], names: &[&str], label: &str) -> Result<usize, TraceError> {
    header
        .iter()
        .position(|h| names.contains(&h.as_str()))
        .ok_or_else(|| TraceError::Schema {
            column: label.to_string(),
            message: format!("header has none of {names:?}"),
        })
}

pub fn parse_lanl_str(text: &str) -> Result<LanlParse, TraceError> {
    let mut layout: Option<[usize; 4]> = None;
    let mut saw_row = false;
    let mut dropped = 0;
    let mut events = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();

        if layout.is_none() {
            if fields[0].parse::<i64>().is_err() {
                let header: Vec<String> = fields.iter().map(|f| f.to_ascii_lowercase()).collect();
                layout = Some([
                    find_column(&header, NODE_COLUMNS, "node")?,
                    find_column(&header, START_COLUMNS, "start")?,
                    find_column(&header, END_COLUMNS, "end")?,
                    find_column(&header, CATEGORY_COLUMNS, "category")?,
                ]);
                continue;
            }
            layout = Some([0, 1, 2, 3]);
        }
        let [node_col, start_col, end_col, cat_col] = layout.unwrap();
        let width = node_col.max(start_col).max(end_col).max(cat_col) + 1;
        if fields.len() < width {
            return Err(TraceError::Malformed {
                line: lineno,
                message: format!("expected at least {width} fields, found {}", fields.len()),
            });
        }
        saw_row = true;
        let node_id: u32 = fields[node_col]
            .parse()
            .map_err(|_| TraceError::Malformed {
                line: lineno,
                message: format!("invalid node number `{}`", fields[node_col]),
            })?;
        let start_s = parse_time(&fields[start_col]).ok_or_else(|| TraceError::Malformed {
            line: lineno,
            message: format!("invalid start time `{}`", fields[start_col]),
        })?;
        let end_s = parse_time(&fields[end_col]).ok_or_else(|| TraceError::Malformed {
            line: lineno,
            message: format!("invalid end time `{}`", fields[end_col]),
        })?;
        if end_s <= start_s {
            warn!("line {lineno}: failure ends at or before it starts; dropped");
            dropped += 1;
            continue;
        }
        events.push(FailureEvent {
            node_id,
            start_s,
            end_s,
            category: category_from_lanl(&fields[cat_col]),
        });
    }

    if !saw_row {
        return Err(TraceError::Empty);
    }
    Ok(LanlParse {
        traces: TraceSet::from_events(events),
        dropped,
    })
}
