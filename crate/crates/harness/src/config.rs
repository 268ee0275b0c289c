//! Run configuration.
//!
//! A run is described by a TOML document:
//!
//! ```toml
//! system = "cns"            # or "ins"
//! t_end = 10.0
//! dt = 0.01                 # omit for the adaptive CFL step
//! cfl = 0.4
//! diagnostic_interval = 0.1
//! seed = 0
//! fit_window = [3.0, 10.0]  # optional, default is the last two thirds
//!
//! [grid]
//! lengths = [6.283185307179586, 6.283185307179586]
//! resolution = [64, 64]
//!
//! [params]                  # INS takes `mu` only
//! mu = 1.0
//! nu = 10.0                 # or `lambda`; exactly one of the two
//! kappa = 1.0
//! gamma = 1.4
//!
//! [initial]
//! kind = "smooth_perturbation"
//! amplitude = 0.3
//! ```
//!
//! The `[initial]` table accepts every field of [`InitialDataSpec`] except that
//! its seed is taken from the top-level `seed`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use torusflow_core::cns::{CnsParams, InitialDataSpec};
use torusflow_core::spectral::{GridSpec, TorusGrid};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Cns,
    Ins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ParamsConfig {
    pub fn cns(mu: f64, nu: f64, kappa: f64, gamma: f64) -> Self {
        ParamsConfig {
            mu,
            lambda: None,
            nu: Some(nu),
            kappa: Some(kappa),
            gamma: Some(gamma),
        }
    }

    pub fn ins(mu: f64) -> Self {
        ParamsConfig {
            mu,
            lambda: None,
            nu: None,
            kappa: None,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: System,
    pub t_end: f64,
    /// Fixed step; `None` selects the CFL-limited step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub diagnostic_interval: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    pub grid: GridSpec,
    pub params: ParamsConfig,
    pub initial: InitialDataSpec,
}

fn default_cfl() -> f64 {
    0.4
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable as TOML")
    }

    /// Schema checks that need no simulation.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("t_end", self.t_end)?;
        positive("diagnostic_interval", self.diagnostic_interval)?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(config_err(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if let Some([a, b]) = self.fit_window {
            if !(a < b) {
                return Err(config_err(format!("fit_window [{a}, {b}] is empty")));
            }
        }
        if self.initial.seed != 0 && self.initial.seed != self.seed {
            return Err(config_err(
                "initial.seed conflicts with the top-level seed; set only `seed`",
            ));
        }
        self.grid()?;
        match self.system {
            System::Cns => {
                self.cns_params()?;
            }
            System::Ins => {
                let p = &self.params;
                if p.lambda.is_some() || p.nu.is_some() || p.kappa.is_some() || p.gamma.is_some() {
                    return Err(config_err(
                        "the incompressible system takes only `mu` in [params]",
                    ));
                }
                positive("mu", p.mu)?;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<TorusGrid>> {
        TorusGrid::from_spec(self.grid).map_err(|e| config_err(e.to_string()))
    }

    pub fn cns_params(&self) -> Result<CnsParams> {
        let p = &self.params;
        let kappa = p.kappa.unwrap_or(1.0);
        let gamma = p.gamma.unwrap_or(1.0);
        let built = match (p.lambda, p.nu) {
            (Some(l), None) => CnsParams::new(p.mu, l, kappa, gamma),
            (None, Some(nu)) => CnsParams::with_nu(p.mu, nu, kappa, gamma),
            _ => {
                return Err(config_err(
                    "give exactly one of `lambda` and `nu` in [params]",
                ))
            }
        };
        built.map_err(|e| config_err(e.to_string()))
    }

    /// Initial-data spec with the run seed applied.
    pub fn initial_spec(&self) -> InitialDataSpec {
        let mut spec = self.initial.clone();
        spec.seed = self.seed;
        spec
    }

    /// Copy with `ν` replaced, keeping `μ`, `κ`, `γ`.
    pub fn with_nu(&self, nu: f64) -> RunConfig {
        let mut c = self.clone();
        c.params.lambda = None;
        c.params.nu = Some(nu);
        c
    }
}
