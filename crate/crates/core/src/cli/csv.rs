//! Fixed-schema CSV tables. Floats are written with 17 significant digits
//! so that parsing a table reproduces every value bit for bit.

use std::fmt::Write as _;

use super::CliError;
use crate::experiments::{StabilityReport, StrongErrorReport};
use crate::system::CheckReport;

pub const CONVERGENCE_HEADER: &str = "delta,error,stderr,n_diverged";
pub const STABILITY_HEADER: &str = "k,t,log_moment,exponent";

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::input(format!("'{s}' is not a float")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "nan".to_string())
}

pub fn convergence_csv(report: &StrongErrorReport) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for i in 0..report.deltas.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(report.deltas[i]),
            fmt_f64(report.errors[i]),
            fmt_f64(report.std_errors[i]),
            report.n_diverged[i]
        );
    }
    out
}

/// Rows of a convergence table: `(delta, error, stderr, n_diverged)`.
pub type ConvergenceRow = (f64, f64, f64, usize);

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRow>, CliError> {
    rows(text, CONVERGENCE_HEADER, 4)?
        .into_iter()
        .map(|f| {
            let n = f[3]
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::input(format!("'{}' is not a count", f[3])))?;
            Ok((parse_f64(f[0])?, parse_f64(f[1])?, parse_f64(f[2])?, n))
        })
        .collect()
}

pub fn stability_csv(report: &StabilityReport) -> String {
    let mut out = String::from(STABILITY_HEADER);
    out.push('\n');
    for (i, t) in report.times().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            report.ks[i],
            fmt_f64(t),
            fmt_opt(report.log_moments[i]),
            fmt_opt(report.exponents[i])
        );
    }
    out
}

/// Rows of a stability table; flagged entries parse back as `None`.
pub type StabilityRow = (usize, f64, Option<f64>, Option<f64>);

pub fn parse_stability_csv(text: &str) -> Result<Vec<StabilityRow>, CliError> {
    let opt = |s: &str| -> Result<Option<f64>, CliError> {
        let v = parse_f64(s)?;
        Ok(if v.is_nan() { None } else { Some(v) })
    };
    rows(text, STABILITY_HEADER, 4)?
        .into_iter()
        .map(|f| {
            let k = f[0]
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::input(format!("'{}' is not a step index", f[0])))?;
            Ok((k, parse_f64(f[1])?, opt(f[2])?, opt(f[3])?))
        })
        .collect()
}

pub fn check_csv(dim: usize, checks: &[(String, CheckReport)]) -> String {
    let mut out = String::from("check_name,passed,worst_margin");
    for i in 1..=dim {
        let _ = write!(out, ",worst_point_{i}");
    }
    out.push('\n');
    for (name, report) in checks {
        let _ = write!(out, "{name},{},{}", report.passed, fmt_f64(report.worst_margin));
        for i in 0..dim {
            let v = report.worst_point.get(i).copied().unwrap_or(f64::NAN);
            let _ = write!(out, ",{}", fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

fn rows<'a>(text: &'a str, header: &str, width: usize) -> Result<Vec<Vec<&'a str>>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        _ => return Err(CliError::input(format!("missing header '{header}'"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() == width {
                Ok(fields)
            } else {
                Err(CliError::input(format!("row '{l}' has {} fields, expected {width}", fields.len())))
            }
        })
        .collect()
}
