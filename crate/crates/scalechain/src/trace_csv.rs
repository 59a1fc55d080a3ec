//! Profiling-trace CSV: `per_container_rate,observed_metric,mean_response_time_s`.
//!
//! Values are written in shortest round-trip form, so parsing a written trace
//! returns the same rows bit for bit. An optional fourth `carried` column
//! (`0`/`1`) marks rows whose response time was carried over from an earlier
//! second.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use scalechain_core::{ProfilingTrace, TraceRow};

use crate::error::{Error, Result};

pub const HEADER: &str = "per_container_rate,observed_metric,mean_response_time_s";
pub const CARRIED_COLUMN: &str = "carried";

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTrace {
    pub trace: ProfilingTrace,
    pub distinct_rates: usize,
    /// Present when the file has the diagnostic `carried` column.
    pub carried: Option<Vec<bool>>,
}

/// Reads a trace file. Requires at least two distinct per-container rates.
pub fn parse_trace(path: impl AsRef<Path>) -> Result<LoadedTrace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: u64, reason: String| Error::Parse {
        path: path.to_owned(),
        line,
        reason,
    };

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(parse_err(1, "empty file, expected header".into())),
        Some(r) => r.map_err(|e| parse_err(1, e.to_string()))?,
    };
    let header: Vec<&str> = header.iter().collect();
    let with_carried = if header.join(",") == HEADER {
        false
    } else if header.join(",") == format!("{HEADER},{CARRIED_COLUMN}") {
        true
    } else {
        return Err(parse_err(
            1,
            format!("expected header `{HEADER}`, got `{}`", header.join(",")),
        ));
    };

    let mut rows = Vec::new();
    let mut carried = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let want = if with_carried { 4 } else { 3 };
        if record.len() != want {
            return Err(parse_err(line, format!("expected {want} fields, got {}", record.len())));
        }
        let mut values = [0.0; 3];
        for (slot, field) in values.iter_mut().zip(record.iter()) {
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("`{field}` is not a number")))?;
        }
        let row = TraceRow::new(values[0], values[1], values[2]);
        row.check().map_err(|reason| parse_err(line, reason.into()))?;
        rows.push(row);
        if with_carried {
            carried.push(match record[3].trim() {
                "0" | "false" => false,
                "1" | "true" => true,
                other => return Err(parse_err(line, format!("`{other}` is not a carried flag"))),
            });
        }
    }

    let trace = ProfilingTrace { rows };
    trace.require_distinct_rates(2).map_err(|source| Error::Trace {
        path: path.to_owned(),
        source,
    })?;
    Ok(LoadedTrace {
        distinct_rates: trace.distinct_rates(),
        trace,
        carried: with_carried.then_some(carried),
    })
}

/// Writes the canonical three-column trace.
pub fn write_trace(trace: &ProfilingTrace, path: impl AsRef<Path>) -> Result<()> {
    write(trace, None, path.as_ref())
}

/// Writes the trace with the diagnostic `carried` column.
pub fn write_trace_with_carried(trace: &ProfilingTrace, carried: &[bool], path: impl AsRef<Path>) -> Result<()> {
    assert_eq!(trace.len(), carried.len());
    write(trace, Some(carried), path.as_ref())
}

fn write(trace: &ProfilingTrace, carried: Option<&[bool]>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut body = String::with_capacity(64 * (trace.len() + 1));
    body.push_str(HEADER);
    if carried.is_some() {
        body.push(',');
        body.push_str(CARRIED_COLUMN);
    }
    body.push('\n');
    for (k, row) in trace.rows.iter().enumerate() {
        use std::fmt::Write as _;
        let _ = write!(
            body,
            "{},{},{}",
            row.per_container_rate, row.observed_metric, row.mean_response_time_s
        );
        if let Some(flags) = carried {
            body.push_str(if flags[k] { ",1" } else { ",0" });
        }
        body.push('\n');
    }
    out.write_all(body.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn tmp(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), contents).unwrap();
        f
    }

    #[test]
    fn reads_two_rows() {
        let f = tmp(&format!("{HEADER}\n1.0,0.21,0.205\n5.0,1.1,0.22\n"));
        let t = parse_trace(f.path()).unwrap();
        assert_eq!(
            t.trace.rows,
            vec![TraceRow::new(1.0, 0.21, 0.205), TraceRow::new(5.0, 1.1, 0.22)]
        );
        assert_eq!(t.distinct_rates, 2);
        assert!(t.carried.is_none());
    }

    #[test]
    fn header_only_is_insufficient() {
        let f = tmp(&format!("{HEADER}\n"));
        let err = parse_trace(f.path()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Trace {
                    source: scalechain_core::Error::InsufficientData(_),
                    ..
                }
            ),
            "{err}"
        );
        assert!(err.to_string().contains("insufficient data"));
    }

    #[test]
    fn malformed_row_names_line() {
        let f = tmp(&format!("{HEADER}\nabc,1,1\n"));
        match parse_trace(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let f = tmp(&format!("{HEADER}\n1,1,1\n2,1,1\n-3,1,1\n"));
        match parse_trace(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_header() {
        let f = tmp("rate,metric,rt\n1,1,1\n");
        assert!(matches!(parse_trace(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_trace_writes_header_only() {
        let f = tempfile::NamedTempFile::new().unwrap();
        write_trace(&ProfilingTrace::default(), f.path()).unwrap();
        assert_eq!(fs::read_to_string(f.path()).unwrap(), format!("{HEADER}\n"));
    }

    #[test]
    fn carried_column_round_trip() {
        let trace = ProfilingTrace {
            rows: vec![TraceRow::new(1.0, 0.2, 0.2), TraceRow::new(2.0, 0.4, 0.2)],
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        write_trace_with_carried(&trace, &[false, true], f.path()).unwrap();
        let back = parse_trace(f.path()).unwrap();
        assert_eq!(back.trace, trace);
        assert_eq!(back.carried, Some(vec![false, true]));
    }

    #[test]
    fn missing_file_mentions_path() {
        let err = parse_trace("/nonexistent/trace.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/trace.csv"));
    }
}
