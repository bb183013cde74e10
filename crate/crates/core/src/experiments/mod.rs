//! Config-driven experiment runner: cut statistics per graph family (`table1`),
//! the ζ sweep of the problem constants (`fig1`), per-round reward fractions
//! of the three policies (`fig2`), and a generic single run. Each command writes
//! `<out>/<experiment>.csv` plus a `<out>/<experiment>.meta.json` sidecar.

mod commands;
pub mod config;
pub mod output;
pub mod seeds;

use std::path::{Path, PathBuf};

pub use commands::{cmd_fig1, cmd_fig2, cmd_run, cmd_table1, execute, par_map, table1_families, Outcome, RunOutput};
pub use config::{ExperimentConfig, ExperimentKind, Family, GraphConfig, Overrides, ResolvedConfig};
pub use output::{Fig1Row, InstanceInfo, Meta, RunRecord, Table1Row, FIG1_COLUMNS, RUN_COLUMNS, TABLE1_COLUMNS};

use crate::error::Result;

impl Outcome {
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Outcome::Table1(_) => TABLE1_COLUMNS,
            Outcome::Fig1(_) => FIG1_COLUMNS,
            Outcome::Fig2(_) | Outcome::Run(_) => RUN_COLUMNS,
        }
    }

    /// Writes the CSV and sidecar into `dir`; returns their paths.
    pub fn write(&self, dir: &Path, cfg: &ResolvedConfig) -> Result<(PathBuf, PathBuf)> {
        let cols = self.columns();
        match self {
            Outcome::Table1(rows) => output::write_outputs(dir, cfg, cols, rows, Vec::new()),
            Outcome::Fig1(rows) => output::write_outputs(dir, cfg, cols, rows, Vec::new()),
            Outcome::Fig2(run) | Outcome::Run(run) => {
                output::write_outputs(dir, cfg, cols, &run.records, run.instances.clone())
            }
        }
    }
}

/// Resolves, runs and writes into `cfg.out`.
pub fn run_config(raw: &ExperimentConfig, ov: &Overrides) -> Result<(PathBuf, PathBuf)> {
    let cfg = raw.resolve(ov)?;
    let outcome = execute(&cfg)?;
    outcome.write(&cfg.out, &cfg)
}
