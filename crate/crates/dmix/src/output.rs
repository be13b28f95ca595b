//! CSV and JSON artifacts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value parses back to the identical `f64`. Missing values are empty
//! fields.

use std::fs;
use std::io;
use std::path::Path;

use dmix_core::dml_sim::RoundMetrics;
use dmix_core::spectral_opt::TraceRow;
use dmix_core::Matrix;
use serde::Serialize;

pub const OPTIMIZER_HEADER: [&str; 5] = [
    "iteration",
    "rho_surrogate",
    "rho_oracle",
    "active_branch",
    "feasibility_residual",
];

pub const DML_HEADER: [&str; 6] = [
    "round",
    "avg_loss",
    "avg_acc",
    "min_acc",
    "consensus_error",
    "grad_norm_at_mean",
];

pub const CDF_HEADER: [&str; 2] = ["x", "F"];

pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn optimizer_trace_csv(trace: &[TraceRow]) -> String {
    to_csv(
        &OPTIMIZER_HEADER,
        trace.iter().map(|r| {
            vec![
                r.iteration.to_string(),
                float(r.rho_surrogate),
                float(r.rho_oracle),
                r.active_branch.as_str().to_string(),
                float(r.feasibility_residual),
            ]
        }),
    )
}

pub fn dml_trace_csv(trace: &[RoundMetrics]) -> String {
    to_csv(
        &DML_HEADER,
        trace.iter().map(|r| {
            vec![
                r.round.to_string(),
                float(r.avg_loss),
                opt_float(r.avg_acc),
                opt_float(r.min_acc),
                float(r.consensus_error),
                float(r.grad_norm_at_mean),
            ]
        }),
    )
}

pub fn cdf_csv(cdf: &[(f64, f64)]) -> String {
    to_csv(&CDF_HEADER, cdf.iter().map(|&(x, f)| vec![float(x), float(f)]))
}

/// Row-major matrix with a `c0,c1,...` header.
pub fn matrix_csv(m: &Matrix) -> String {
    let header: Vec<String> = (0..m.cols()).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    to_csv(&header, (0..m.rows()).map(|i| m.row(i).iter().map(|&v| float(v)).collect()))
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|v| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"))).collect())
        .collect::<Result<_, _>>()?;
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn write(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write(path, &text)
}

/// Mean and standard error across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// `s/√n` with the unbiased sample deviation; absent for one seed.
    pub se: Option<f64>,
    pub n: usize,
    pub values: Vec<f64>,
}

impl Stat {
    pub fn of(values: Vec<f64>) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = (n > 1).then(|| {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Stat { mean, se, n, values }
    }
}
