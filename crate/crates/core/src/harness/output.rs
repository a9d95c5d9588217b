//! CSV and JSON artifacts.
//!
//! Record CSVs have the header `t,w,g,regret_cum,wealth,V,beta,dual_norm`.
//! Vector fields (`w`, `g`, and `regret_cum` across comparators) are joined
//! with `;`. Floats use 17 significant digits and round-trip exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::experiment::ExperimentReport;
use super::scenario::csv_error;
use crate::error::{Error, Result};
use crate::linalg::format_f64;
use crate::reduction::RegretRecord;

pub const RECORD_HEADER: [&str; 8] = ["t", "w", "g", "regret_cum", "wealth", "V", "beta", "dual_norm"];

/// The columns of one record CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordRow {
    pub t: usize,
    pub w: Vec<f64>,
    pub g: Vec<f64>,
    pub regret_cum: Vec<f64>,
    pub wealth: f64,
    pub scale: f64,
    pub beta: f64,
    pub dual_norm: f64,
}

impl From<&RegretRecord> for RecordRow {
    fn from(r: &RegretRecord) -> Self {
        Self {
            t: r.t,
            w: r.play.clone(),
            g: r.loss.clone(),
            regret_cum: r.regret_cum.clone(),
            wealth: r.wealth,
            scale: r.scale,
            beta: r.beta,
            dual_norm: r.dual_norm,
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format_f64(*x)).collect::<Vec<_>>().join(";")
}

fn split(s: &str, line: usize) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| parse_f64(x, line)).collect()
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: `{s}`: {e}")))
}

/// Writes records as CSV to any writer.
pub fn write_records_csv<W: Write>(out: W, records: &[RegretRecord]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.t.to_string(),
            join(&r.play),
            join(&r.loss),
            join(&r.regret_cum),
            format_f64(r.wealth),
            format_f64(r.scale),
            format_f64(r.beta),
            format_f64(r.dual_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RegretRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_csv(file, records).map_err(|e| csv_error(path, e))
}

pub fn parse_records_csv<R: std::io::Read>(input: R) -> Result<Vec<RecordRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != RECORD_HEADER.len() {
            return Err(Error::Parse(format!("line {line}: expected 8 fields, got {}", rec.len())));
        }
        rows.push(RecordRow {
            t: rec[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {line}: round: {e}")))?,
            w: split(&rec[1], line)?,
            g: split(&rec[2], line)?,
            regret_cum: split(&rec[3], line)?,
            wealth: parse_f64(&rec[4], line)?,
            scale: parse_f64(&rec[5], line)?,
            beta: parse_f64(&rec[6], line)?,
            dual_norm: parse_f64(&rec[7], line)?,
        });
    }
    Ok(rows)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<RecordRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_records_csv(file)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// One row per `(horizon, comparator)`: means across trials.
pub fn write_summary_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e| csv_error(path, e);
    w.write_record([
        "T",
        "padded_T",
        "comparator",
        "mean_regret",
        "mean_baseline_regret",
        "mean_bound_form",
        "fitted_c",
    ])
    .map_err(io)?;
    for rung in &report.rungs {
        for (j, label) in report.comparator_labels.iter().enumerate() {
            let baseline = rung
                .mean_baseline_regret
                .as_ref()
                .map(|b| format_f64(b[j]))
                .unwrap_or_default();
            w.write_record([
                rung.horizon.to_string(),
                rung.padded_horizon.to_string(),
                label.clone(),
                format_f64(rung.mean_regret[j]),
                baseline,
                format_f64(rung.mean_bound_form[j]),
                format_f64(rung.fitted_c[j]),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
