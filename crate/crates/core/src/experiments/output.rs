//! CSV row types, their fixed headers, and the JSON sidecar.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ResolvedConfig;
use crate::bilinear::EnvironmentJson;
use crate::error::Result;
use crate::oracle::ProblemConstants;

/// Bumped whenever a column is added, removed, renamed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

pub const TABLE1_COLUMNS: &[&str] = &[
    "family",
    "n",
    "m",
    "draws",
    "within_ratio",
    "alpha1_const",
    "alpha1_gamma",
    "alpha2_const",
    "alpha2_gamma",
    "alpha2_epsilon",
];

pub const FIG1_COLUMNS: &[&str] =
    &["zeta", "gamma", "epsilon", "alpha1", "alpha2", "delta_gap", "matrices", "exact_matrices", "denominator"];

pub const RUN_COLUMNS: &[&str] = &[
    "matrix",
    "seed",
    "policy",
    "t",
    "x",
    "xp",
    "expected_global",
    "noisy_global",
    "cum_regret",
    "cum_alpha1_regret",
    "cum_alpha2_regret",
    "fraction_of_optimal",
];

/// One graph family. `α₁ = alpha1_const + alpha1_gamma·γ`,
/// `α₂ = alpha2_const + alpha2_gamma·γ + alpha2_epsilon·ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub family: String,
    pub n: usize,
    /// Directed edge count, averaged over draws for random families.
    pub m: f64,
    pub draws: usize,
    pub within_ratio: f64,
    pub alpha1_const: f64,
    pub alpha1_gamma: f64,
    pub alpha2_const: f64,
    pub alpha2_gamma: f64,
    pub alpha2_epsilon: f64,
}

/// Averages over matrices at one grid point. The alpha columns are evaluated
/// at the averaged `γ`, `ε` (both alphas are affine in them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub zeta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub delta_gap: f64,
    pub matrices: usize,
    pub exact_matrices: usize,
    /// `exact`, `surrogate` or `mixed`.
    pub denominator: String,
}

/// One round of one run. `seed` is the repetition index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub matrix: usize,
    pub seed: usize,
    pub policy: String,
    pub t: usize,
    pub x: usize,
    pub xp: usize,
    pub expected_global: f64,
    pub noisy_global: f64,
    pub cum_regret: f64,
    pub cum_alpha1_regret: f64,
    pub cum_alpha2_regret: f64,
    pub fraction_of_optimal: f64,
}

/// Constants of one `M★` instance, as stored in the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub matrix: usize,
    pub env: EnvironmentJson,
    pub constants: ProblemConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub schema_version: u32,
    pub experiment: String,
    pub csv: String,
    pub columns: Vec<String>,
    pub header_sha256: String,
    pub config: ResolvedConfig,
    pub instances: Vec<InstanceInfo>,
}

pub fn header_line(columns: &[&str]) -> String {
    columns.join(",")
}

pub fn header_sha256(columns: &[&str]) -> String {
    hex::encode(Sha256::digest(header_line(columns).as_bytes()))
}

/// Writes `rows` under `columns`. Fails if the row type serializes to a different header.
pub fn write_csv<T: Serialize>(path: &Path, columns: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != columns {
        return Err(crate::Error::Config(format!(
            "{}: header {:?} does not match schema {:?}",
            path.display(),
            header,
            columns
        )));
    }
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`.
pub fn write_outputs<T: Serialize>(
    dir: &Path,
    config: &ResolvedConfig,
    columns: &[&str],
    rows: &[T],
    instances: Vec<InstanceInfo>,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let name = config.experiment.name();
    let csv_path = dir.join(format!("{name}.csv"));
    let meta_path = dir.join(format!("{name}.meta.json"));
    write_csv(&csv_path, columns, rows)?;
    let meta = Meta {
        schema_version: SCHEMA_VERSION,
        experiment: name.to_owned(),
        csv: format!("{name}.csv"),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        header_sha256: header_sha256(columns),
        config: config.clone(),
        instances,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&meta_path, text)?;
    Ok((csv_path, meta_path))
}
