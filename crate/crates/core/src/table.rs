//! CSV tables of sweep summaries.
//!
//! Floats are written with nine significant digits in the shortest of fixed
//! or exponent notation, matching C's `%.9g`. Absent values are empty fields.

use std::io;

use crate::engine::SweepSummary;
use crate::error::{Error, Result};
use crate::interference::{InterferenceConfig, SchemeSet};

pub const SWEEP_HEADER: [&str; 16] = [
    "model",
    "n",
    "b",
    "update_rule",
    "K",
    "schemes",
    "theta",
    "p_c",
    "n_c",
    "c_I",
    "replicates",
    "coop_mean",
    "coop_std",
    "cost_mean",
    "cost_std",
    "master_seed",
];

/// Format `x` with nine significant digits, `%.9g` style.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig9).unwrap_or_default()
}

pub fn write_sweep_csv<W: io::Write>(summaries: &[SweepSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for s in summaries {
        let i = &s.interference;
        w.write_record([
            s.model.as_str().to_string(),
            s.n.to_string(),
            format_sig9(s.b),
            s.update_rule.as_str().to_string(),
            opt(s.k),
            i.schemes.to_string(),
            opt(if i.schemes.is_empty() { None } else { i.theta }),
            opt(i.p_c),
            opt(i.n_c),
            opt(i.c_i),
            s.replicates.to_string(),
            format_sig9(s.coop_mean),
            format_sig9(s.coop_std),
            format_sig9(s.cost_mean),
            format_sig9(s.cost_std),
            s.master_seed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| Error::Table(format!("row {line}: cannot parse {} from `{raw}`", SWEEP_HEADER[idx])))
}

fn opt_field(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    match rec.get(idx).map(str::trim) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, idx, line).map(Some),
    }
}

/// Parse a table written by [`write_sweep_csv`]. Seed lists are not part of
/// the table and come back empty.
pub fn read_sweep_csv<R: io::Read>(input: R) -> Result<Vec<SweepSummary>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::Table(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let interference = InterferenceConfig {
            schemes: SchemeSet::parse(rec.get(5).unwrap_or(""))?,
            theta: opt_field(&rec, 6, line)?,
            p_c: opt_field(&rec, 7, line)?,
            n_c: opt_field(&rec, 8, line)?,
            c_i: opt_field(&rec, 9, line)?,
            ..Default::default()
        };
        out.push(SweepSummary {
            model: field(&rec, 0, line)?,
            n: field(&rec, 1, line)?,
            b: field(&rec, 2, line)?,
            update_rule: field(&rec, 3, line)?,
            k: opt_field(&rec, 4, line)?,
            interference,
            replicates: field(&rec, 10, line)?,
            coop_mean: field(&rec, 11, line)?,
            coop_std: field(&rec, 12, line)?,
            cost_mean: field(&rec, 13, line)?,
            cost_std: field(&rec, 14, line)?,
            master_seed: field(&rec, 15, line)?,
            graph_seeds: Vec::new(),
            replicate_seeds: Vec::new(),
        });
    }
    Ok(out)
}
