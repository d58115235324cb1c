use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::composite::{t_star_from_mean, CompositeSpec};
use crate::error::{Error, Result};
use crate::limit::eta_star;
use crate::model::OVParams;
use crate::spectral::{log_ladder, ContinuationOptions, NewtonOptions, Resolution};

/// One `(N, L)` configuration compared against composites of several widths `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub n: usize,
    pub length: f64,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_update: f64,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub adaptive_grid: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = NewtonOptions::default();
        Self {
            tol_update: d.tol_update,
            tol_residual: d.tol_residual,
            max_iter: d.max_iter,
            adaptive_grid: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Profile extracted from a direct simulation, composite if that fails.
    Simulator,
    /// Composite at large `β`, continued down to the first ladder value.
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    /// Compare against the composite with amplitude `η*`.
    EtaStar,
    /// Compare against the composite with the solution's own amplitude.
    EtaHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_count: usize,
    pub output_dir: PathBuf,
    pub seed: SeedPolicy,
    pub eta_mode: EtaMode,
    pub order_window: (f64, f64),
    /// Steepness ladder of the truncated-front check.
    pub front_betas: Vec<f64>,
    /// Steepness and periods of the periodic amplitude probe.
    pub probe_beta: f64,
    pub probe_periods: Vec<usize>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            beta_min: 2.0 / 0.0223,
            beta_max: 6000.0,
            beta_count: 16,
            output_dir: PathBuf::from("out"),
            seed: SeedPolicy::Simulator,
            eta_mode: EtaMode::EtaStar,
            order_window: (200.0, 2000.0),
            front_betas: vec![200.0, 800.0, 3200.0],
            probe_beta: 3000.0,
            probe_periods: vec![20, 40, 80],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: OVParams,
    #[serde(default)]
    pub case: BTreeMap<String, CaseConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The two-wave comparison of the reference setting: `(N, L) = (40, 1)`, `R ∈ {2, 4, 6, 8}`.
    pub fn reference() -> Self {
        let mut case = BTreeMap::new();
        case.insert(
            "n40".to_string(),
            CaseConfig {
                n: 40,
                length: 1.0,
                r: vec![2.0, 4.0, 6.0, 8.0],
            },
        );
        Self {
            model: OVParams::reference(),
            case,
            solver: SolverConfig::default(),
            experiment: ExperimentSection::default(),
        }
    }

    pub fn beta_ladder(&self) -> Vec<f64> {
        let e = &self.experiment;
        log_ladder(e.beta_min, e.beta_max, e.beta_count)
    }

    pub fn continuation_options(&self) -> ContinuationOptions {
        ContinuationOptions {
            newton: NewtonOptions {
                tol_update: self.solver.tol_update,
                tol_residual: self.solver.tol_residual,
                max_iter: self.solver.max_iter,
                ..NewtonOptions::default()
            },
            resolution: if self.solver.adaptive_grid {
                Resolution::Adaptive
            } else {
                Resolution::Fixed
            },
            ..ContinuationOptions::default()
        }
    }

    /// Composite spec of width `r` matching a case's mean headway.
    pub fn composite_for(&self, case: &CaseConfig, r: f64) -> CompositeSpec {
        let d = eta_star(&self.model);
        let n = case.n as f64;
        let ts = t_star_from_mean(self.model.l(), d.eta_star, case.length / n, n);
        CompositeSpec::periodic(0.0, ts, n, r)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.beta_count < 4 || !(e.beta_min > 0.0 && e.beta_max > e.beta_min) {
            return Err(Error::Config(format!(
                "beta ladder must be strictly increasing with at least 4 points (min {}, max {}, count {})",
                e.beta_min, e.beta_max, e.beta_count
            )));
        }
        if !(e.order_window.0 > 0.0 && e.order_window.1 > e.order_window.0) {
            return Err(Error::Config("order_window must be an increasing pair".into()));
        }
        for (name, c) in &self.case {
            if c.n < 2 || !(c.length > 0.0) {
                return Err(Error::Config(format!("case {name}: need n >= 2 and length > 0")));
            }
            let mean = c.length / c.n as f64;
            if !(mean > 0.0 && mean < 2.0 * self.model.l()) {
                return Err(Error::Config(format!("case {name}: mean headway {mean} outside (0, 2l)")));
            }
            if c.r.is_empty() {
                return Err(Error::Config(format!("case {name}: at least one R is required")));
            }
            for &r in &c.r {
                self.composite_for(c, r)
                    .validate(&self.model)
                    .map_err(|err| Error::Config(format!("case {name}, R = {r}: {err}")))?;
            }
        }
        Ok(())
    }
}
