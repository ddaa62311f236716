use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{FailureEvent, TraceError, TraceSet};

pub const NORMALIZED_HEADER: &str = "node_id,start_s,end_s,category";

const COLUMNS: [&str; 4] = ["node_id", "start_s", "end_s", "category"];

/// Renders the normalized CSV: the header, then one LF-terminated row per
/// event with integer times and an upper-case category token.
pub fn write_normalized(traces: &TraceSet) -> String {
    let mut out = String::with_capacity(32 * (traces.len() + 1));
    out.push_str(NORMALIZED_HEADER);
    out.push('\n');
    for e in traces.events() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.node_id, e.start_s, e.end_s, e.category
        );
    }
    out
}

pub fn to_normalized_csv(traces: &TraceSet, path: &Path) -> Result<(), TraceError> {
    fs::write(path, write_normalized(traces)).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_normalized_csv(path: &Path) -> Result<TraceSet, TraceError> {
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_normalized_str(&text)
}

pub fn parse_normalized_str(text: &str) -> Result<TraceSet, TraceError> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    let cols: Vec<&str> = header.split(',').collect();
    for (i, want) in COLUMNS.iter().enumerate() {
        match cols.get(i) {
            Some(got) if got == want => {}
            Some(got) => {
                return Err(TraceError::Schema {
                    column: (*got).to_string(),
                    message: format!("expected `{want}` at position {}", i + 1),
                })
            }
            None => {
                return Err(TraceError::Schema {
                    column: (*want).to_string(),
                    message: "missing from header".into(),
                })
            }
        }
    }
    if let Some(extra) = cols.get(COLUMNS.len()) {
        return Err(TraceError::Schema {
            column: (*extra).to_string(),
            message: "unexpected extra column".into(),
        });
    }

    let mut events = Vec::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != COLUMNS.len() {
            return Err(TraceError::Malformed {
                line: lineno,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let bad = |col: &str, v: &str| TraceError::Schema {
            column: col.to_string(),
            message: format!("line {lineno}: invalid value `{v}`"),
        };
        let node_id = fields[0].parse().map_err(|_| bad("node_id", fields[0]))?;
        let start_s = fields[1].parse().map_err(|_| bad("start_s", fields[1]))?;
        let end_s: i64 = fields[2].parse().map_err(|_| bad("end_s", fields[2]))?;
        let category = fields[3].parse().map_err(|_| bad("category", fields[3]))?;
        if end_s <= start_s {
            return Err(TraceError::Malformed {
                line: lineno,
                message: "end_s must exceed start_s".into(),
            });
        }
        events.push(FailureEvent {
            node_id,
            start_s,
            end_s,
            category,
        });
    }
    Ok(TraceSet::from_events(events))
}
