use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::GraphKind;
use crate::oracle::DEFAULT_BUDGET;
use crate::policy::PolicyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table1,
    Fig1,
    Fig2,
    Run,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Run => "run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Complete,
    ErdosRenyi,
    Circle,
    Star,
    Matching,
}

/// `graph` block of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Edge probability, `erdos_renyi` only.
    #[serde(default)]
    pub p: Option<f64>,
}

/// Config file as written by the user; every field except `experiment` is optional
/// and falls back to the per-experiment defaults in [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub graph: Option<GraphConfig>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default, rename = "T")]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub repetitions: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Number of `M★` draws (fig1, fig2, run).
    #[serde(default)]
    pub matrices: Option<usize>,
    #[serde(default)]
    pub policies: Option<Vec<PolicyKind>>,
    /// Largest `Kⁿ` the exhaustive oracle may enumerate.
    #[serde(default)]
    pub budget: Option<u64>,
    /// Fig1 grid spacing.
    #[serde(default)]
    pub zeta_step: Option<f64>,
    /// Run only: fixed confidence radius.
    #[serde(default)]
    pub radius_override: Option<f64>,
    /// Run only: start the estimator at `θ★`.
    #[serde(default)]
    pub preload_theta_star: Option<bool>,
}

/// Config with every default filled in and every range checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentKind,
    pub graph: GraphKind,
    pub n: usize,
    /// Edge probability of the random family (also used by `table1`).
    pub p: f64,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub zeta: Option<f64>,
    pub zeta_step: f64,
    pub lambda: f64,
    pub delta: f64,
    pub sigma: f64,
    pub repetitions: usize,
    pub matrices: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub policies: Vec<PolicyKind>,
    pub budget: u64,
    pub radius_override: Option<f64>,
    pub preload_theta_star: bool,
    pub paper_scale: bool,
}

/// Overrides coming from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paper_scale: bool,
}

struct Defaults {
    family: Family,
    n: usize,
    p: f64,
    d: usize,
    horizon: usize,
    zeta: Option<f64>,
    sigma: f64,
    repetitions: usize,
    matrices: usize,
}

fn defaults(kind: ExperimentKind, paper_scale: bool) -> Defaults {
    let base = Defaults {
        family: Family::Complete,
        n: 5,
        p: 0.6,
        d: 3,
        horizon: 1000,
        zeta: None,
        sigma: 0.1,
        repetitions: 1,
        matrices: 1,
    };
    match (kind, paper_scale) {
        (ExperimentKind::Table1, _) => Defaults { n: 100, repetitions: 100, ..base },
        (ExperimentKind::Fig1, false) => Defaults { n: 6, d: 4, zeta: Some(0.0), matrices: 20, ..base },
        (ExperimentKind::Fig1, true) => Defaults { n: 10, d: 10, zeta: Some(0.0), matrices: 100, ..base },
        (ExperimentKind::Fig2, scale) => Defaults {
            n: 5,
            d: 10,
            horizon: if scale { 20_000 } else { 5000 },
            zeta: Some(0.0),
            repetitions: 10,
            matrices: 5,
            ..base
        },
        (ExperimentKind::Run, _) => base,
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Fills defaults, applies overrides and validates.
    ///
    /// With `paper_scale`, fields absent from the file take the full-size values;
    /// explicit fields always win.
    pub fn resolve(&self, ov: &Overrides) -> Result<ResolvedConfig> {
        let kind = self.experiment;
        let def = defaults(kind, ov.paper_scale);
        let graph = self.graph.clone().unwrap_or(GraphConfig { family: None, n: None, p: None });
        let family = graph.family.unwrap_or(def.family);
        let n = graph.n.unwrap_or(def.n);
        let p = graph.p.unwrap_or(def.p);
        if graph.p.is_some() && family != Family::ErdosRenyi && kind != ExperimentKind::Table1 {
            return Err(Error::Config("graph.p is only used by the erdos_renyi family".into()));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(format!("graph.p must lie in (0, 1], got {p}")));
        }
        let graph_kind = match family {
            Family::Complete => GraphKind::Complete,
            Family::ErdosRenyi => GraphKind::ErdosRenyi { p },
            Family::Circle => GraphKind::Circle,
            Family::Star => GraphKind::Star,
            Family::Matching => GraphKind::Matching,
        };
        if matches!(kind, ExperimentKind::Fig1 | ExperimentKind::Fig2) && family != Family::Complete {
            return Err(Error::Config(format!("{} runs on the complete graph only", kind.name())));
        }

        let zeta = self.zeta.or(def.zeta);
        let cfg = ResolvedConfig {
            experiment: kind,
            graph: graph_kind,
            n,
            p,
            d: self.d.unwrap_or(def.d),
            horizon: self.horizon.unwrap_or(def.horizon),
            zeta,
            zeta_step: self.zeta_step.unwrap_or(0.01),
            lambda: self.lambda.unwrap_or(1.0),
            delta: self.delta.unwrap_or(0.1),
            sigma: self.sigma.unwrap_or(def.sigma),
            repetitions: self.repetitions.unwrap_or(def.repetitions),
            matrices: self.matrices.unwrap_or(def.matrices),
            seed: ov.seed.or(self.seed).unwrap_or(0),
            out: ov.out.clone().or_else(|| self.out.clone()).unwrap_or_else(|| PathBuf::from("out")),
            policies: self.policies.clone().unwrap_or_else(|| PolicyKind::ALL.to_vec()),
            budget: self.budget.unwrap_or(DEFAULT_BUDGET as u64),
            radius_override: self.radius_override,
            preload_theta_star: self.preload_theta_star.unwrap_or(false),
            paper_scale: ov.paper_scale,
        };
        if kind != ExperimentKind::Run && (cfg.radius_override.is_some() || self.preload_theta_star.is_some()) {
            return Err(Error::Config("radius_override and preload_theta_star are run-only".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ResolvedConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("graph.n must be >= 2, got {}", self.n));
        }
        if self.graph == GraphKind::Matching && !self.n.is_multiple_of(2) {
            return bad(format!("matching needs an even n, got {}", self.n));
        }
        if self.d < 2 {
            return bad(format!("d must be >= 2, got {}", self.d));
        }
        if self.horizon == 0 {
            return bad("T must be >= 1".into());
        }
        if let Some(z) = self.zeta {
            if !(0.0..1.0).contains(&z) {
                return bad(format!("zeta must lie in [0, 1), got {z}"));
            }
        }
        if !(self.zeta_step > 0.0 && self.zeta_step < 1.0) {
            return bad(format!("zeta_step must lie in (0, 1), got {}", self.zeta_step));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if self.repetitions == 0 || self.matrices == 0 {
            return bad("repetitions and matrices must be >= 1".into());
        }
        if self.policies.is_empty() {
            return bad("policies must not be empty".into());
        }
        let mut seen = self.policies.clone();
        seen.sort_by_key(|p| p.name());
        seen.dedup();
        if seen.len() != self.policies.len() {
            return bad("policies must not repeat".into());
        }
        if let Some(r) = self.radius_override {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!("radius_override must be >= 0, got {r}"));
            }
        }
        if self.repetitions > u16::MAX as usize || self.matrices > u16::MAX as usize {
            return bad("repetitions and matrices must be < 65536".into());
        }
        Ok(())
    }

    /// The ζ grid `0, step, 2·step, … < 1`.
    pub fn zeta_grid(&self) -> Vec<f64> {
        // integer divisions keep grid points like 0.95 free of accumulated error
        let per_unit = (1.0 / self.zeta_step).round();
        let point = |i: usize| {
            if (per_unit * self.zeta_step - 1.0).abs() < 1e-12 {
                i as f64 / per_unit
            } else {
                i as f64 * self.zeta_step
            }
        };
        (0..).map(point).take_while(|z| *z < 1.0).collect()
    }
}
