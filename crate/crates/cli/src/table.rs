//! Plot-ready result tables: a fixed `t,x,observable,re,im` row schema
//! plus a provenance metadata block, emitted as CSV (metadata as `#`
//! comment lines) or JSON (metadata as an object).

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub t: f64,
    pub x: f64,
    pub observable: String,
    pub re: f64,
    pub im: f64,
}

/// Column-equal-length is guaranteed by construction (rows are structs).
#[derive(Debug, Clone, Default, Serialize)]
pub struct ResultTable {
    pub metadata: BTreeMap<String, String>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn push(&mut self, t: f64, x: f64, observable: impl Into<String>, re: f64, im: f64) {
        self.rows.push(Row {
            t,
            x,
            observable: observable.into(),
            re,
            im,
        });
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_csv(table: &ResultTable, w: &mut dyn Write) -> Result<(), CliError> {
    for (k, v) in &table.metadata {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "t,x,observable,re,im")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.x),
            r.observable,
            fmt_f64(r.re),
            fmt_f64(r.im)
        )?;
    }
    Ok(())
}

pub fn emit_json(table: &ResultTable, w: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, table)
        .map_err(|e| CliError::Solver(format!("JSON serialization: {e}")))?;
    writeln!(w)?;
    Ok(())
}

/// Parses a CSV emitted by [`emit_csv`] back into a table (used by the
/// round-trip tests; observable names must not contain commas, which the
/// emitter guarantees).
#[cfg(test)]
pub fn read_csv(text: &str) -> Result<ResultTable, CliError> {
    let mut table = ResultTable::default();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once(" = ")
                .ok_or_else(|| CliError::Solver(format!("line {}: bad metadata", lineno + 1)))?;
            table.meta(k, v);
            continue;
        }
        if !saw_header {
            if line != "t,x,observable,re,im" {
                return Err(CliError::Solver(format!("line {}: bad header", lineno + 1)));
            }
            saw_header = true;
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(CliError::Solver(format!("line {}: expected 5 fields", lineno + 1)));
        }
        let f = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Solver(format!("line {}: {e}", lineno + 1)))
        };
        table.push(f(parts[0])?, f(parts[1])?, parts[2], f(parts[3])?, f(parts[4])?);
    }
    if !saw_header {
        return Err(CliError::Solver("missing header row".into()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_emits_only_metadata_and_header() {
        let mut t = ResultTable::default();
        t.meta("config_sha256", "abc");
        let mut buf = Vec::new();
        emit_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# config_sha256 = abc\nt,x,observable,re,im\n");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = ResultTable::default();
        t.meta("config_sha256", "deadbeef");
        t.meta("scenario", "heom");
        t.push(0.1, -2.0, "rho_eg", 1.0 / 3.0, -1e-17);
        t.push(f64::MIN_POSITIVE, 0.0, "density", 0.123456789012345678, 0.0);
        let mut buf = Vec::new();
        emit_csv(&t, &mut buf).unwrap();
        let back = read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.metadata, t.metadata);
        assert_eq!(back.rows, t.rows);
    }

    #[test]
    fn json_carries_the_same_schema() {
        let mut t = ResultTable::default();
        t.meta("scenario", "markov-scatter");
        t.push(1.0, 2.0, "density", 3.0, 0.0);
        let mut buf = Vec::new();
        emit_json(&t, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["metadata"]["scenario"], "markov-scatter");
        assert_eq!(v["rows"][0]["observable"], "density");
        assert_eq!(v["rows"][0]["re"], 3.0);
    }
}
