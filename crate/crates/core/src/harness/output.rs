use std::io::{Read, Write};

use super::{AggregateRow, RunRecord};
use crate::error::{Error, Result};

pub const RESULTS_HEADER: [&str; 16] = [
    "run_id",
    "topology",
    "n",
    "avg_k",
    "transmission",
    "distribution",
    "phi",
    "rewiring",
    "delta",
    "seed",
    "iterations",
    "converged",
    "bc",
    "beta",
    "corr",
    "outcome",
];

/// `%.6g`-style formatting: six significant digits, trailing zeros
/// dropped, scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // Exponent after rounding to six digits.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn outcome_label(r: &RunRecord) -> &'static str {
    match (&r.error, r.outcome) {
        (Some(_), _) => "error",
        (None, Some(o)) => o.label(),
        (None, None) => "undefined",
    }
}

/// Results table, one row per record in the given order.
pub fn write_results_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        w.write_record([
            r.run_id.to_string(),
            r.topology.clone(),
            r.n.to_string(),
            format_sig6(r.avg_k),
            r.transmission.label().to_string(),
            r.distribution.label().to_string(),
            format_sig6(r.phi),
            r.rewiring.to_string(),
            format_sig6(r.delta),
            r.seed.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            format_sig6(r.bc),
            format_sig6(r.beta),
            format_sig6(r.corr),
            outcome_label(r).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("results csv", e))
}

/// Checkpoint sidecar: `run_id,iteration,bc`.
pub fn write_checkpoints_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "iteration", "bc"])?;
    for r in records {
        for c in &r.checkpoints {
            w.write_record([
                r.run_id.to_string(),
                c.iteration.to_string(),
                format_sig6(c.bc),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("checkpoint csv", e))
}

/// Per-configuration summary: mean and sample standard deviation of BC and
/// balance over replicates.
pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "topology",
        "transmission",
        "distribution",
        "rewiring",
        "delta",
        "phi",
        "runs",
        "bc_mean",
        "bc_std",
        "beta_mean",
        "beta_std",
    ])?;
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.transmission.label().to_string(),
            r.distribution.label().to_string(),
            r.rewiring.to_string(),
            format_sig6(r.delta),
            format_sig6(r.phi),
            r.runs.to_string(),
            format_sig6(r.bc_mean),
            format_sig6(r.bc_std),
            format_sig6(r.beta_mean),
            format_sig6(r.beta_std),
        ])?;
    }
    w.flush().map_err(|e| Error::io("aggregate csv", e))
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = row.get(idx).unwrap_or("");
    raw.parse().map_err(|_| Error::Parse {
        path: "results csv".into(),
        line,
        message: format!("bad value '{raw}' in column {}", RESULTS_HEADER[idx]),
    })
}

/// Parses a results table written by [`write_results_csv`]. Checkpoints are
/// not part of the table and come back empty.
pub fn read_results_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::Parse {
            path: "results csv".into(),
            line: 1,
            message: "unexpected header".to_string(),
        });
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let outcome_raw = row.get(15).unwrap_or("");
        let (outcome, error) = match outcome_raw {
            "error" => (None, Some("failed run".to_string())),
            "undefined" => (None, None),
            other => (Some(other.parse()?), None),
        };
        records.push(RunRecord {
            run_id: field(&row, 0, line)?,
            topology: field(&row, 1, line)?,
            n: field(&row, 2, line)?,
            avg_k: field(&row, 3, line)?,
            transmission: row.get(4).unwrap_or("").parse()?,
            distribution: row.get(5).unwrap_or("").parse()?,
            phi: field(&row, 6, line)?,
            rewiring: field(&row, 7, line)?,
            delta: field(&row, 8, line)?,
            seed: field(&row, 9, line)?,
            iterations: field(&row, 10, line)?,
            converged: field(&row, 11, line)?,
            bc: field(&row, 12, line)?,
            beta: field(&row, 13, line)?,
            corr: field(&row, 14, line)?,
            outcome,
            checkpoints: Vec::new(),
            error,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(5.0 / 9.0), "0.555556");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(std::f64::consts::TAU), "6.28319");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(999999.7), "1e6");
        assert_eq!(format_sig6(0.00012345678), "0.000123457");
        assert_eq!(format_sig6(0.000012345678), "1.23457e-5");
        assert_eq!(format_sig6(-0.25), "-0.25");
        assert_eq!(format_sig6(f64::NAN), "nan");
        assert_eq!(format_sig6(100.0), "100");
    }
}
