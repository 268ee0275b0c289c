//! Single-run orchestration: integrate, sample, fit, and persist.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use torusflow_core::cns::{cns_step_with, generate_initial_data, stable_dt, CnsState, StepOptions};
use torusflow_core::diagnostics::{
    energy_balance_residual, fit_decay_or_zero, weighted_norm_accumulator, DecayFit, DiagnosticRow,
    EnergySample, Reduction, TimeSeries,
};
use torusflow_core::ins::{
    beta1, ins_initial_data, ins_stable_dt, ins_step_with, InsState, InsStepOptions,
};
use torusflow_core::linear::{predicted_alpha0, slowest_linear_rate};
use torusflow_core::spectral::{vector_grad_norm, ScalarField};

use crate::checkpoint::{self, Snapshot};
use crate::config::{RunConfig, System};
use crate::error::{HarnessError, Result};

pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const FAILURE_CHECKPOINT: &str = "failure.ckpt";

/// Relative mass drift allowed over a run.
pub const MASS_TOL: f64 = 1e-12;
/// Mean-momentum drift allowed per unit time.
pub const MOMENTUM_RATE_TOL: f64 = 1e-8;
/// Bound on the relative identity residuals.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Slack factor on the incompressible kinetic-energy bound.
pub const KE_BOUND_FACTOR: f64 = 1.05;
/// Bound on `‖div u‖/‖∇u‖` for the incompressible system.
pub const DIVERGENCE_TOL: f64 = 1e-8;

pub fn build_id() -> String {
    match option_env!("TORUSFLOW_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("torusflow {} ({rev})", env!("CARGO_PKG_VERSION")),
        _ => format!("torusflow {}", env!("CARGO_PKG_VERSION")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSummary {
    pub mass_initial: f64,
    pub mass_final: f64,
    /// `max |mass(t) − mass(0)| / mass(0)` over all steps.
    pub max_mass_drift: f64,
    pub momentum_initial: [f64; 2],
    pub momentum_final: [f64; 2],
    /// `max |momentum(t) − momentum(0)| / t_end` over all steps.
    pub momentum_drift_rate: f64,
    /// Density bounds over all steps.
    pub rho_min: f64,
    pub rho_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    /// `min(μ/ρ̄, ρ̄P′(ρ̄)/ν)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha0_shape: Option<f64>,
    /// Slowest linear decay rate over the grid modes and the mode achieving it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slowest_linear_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slowest_mode: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeBound {
    pub beta1: f64,
    /// `max KE(t) / (e^{−β₁t} KE(0))` over the samples.
    pub worst_ratio: f64,
    pub factor: f64,
    /// Samples where the kinetic energy increased.
    pub monotonicity_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub max_abs_residual: f64,
    /// `max_abs_residual / E(0)` (equal to the absolute value when `E(0) = 0`).
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub max_flux_identity: f64,
    pub max_elliptic: f64,
    pub max_helmholtz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEntry {
    /// Exponent used in `e^{βt}`: half the fitted decay rate, or zero.
    pub beta: f64,
    pub sup: f64,
    pub integral: f64,
    /// Same with the extra factor `t`.
    pub sup_t: f64,
    pub integral_t: f64,
}

impl WeightedEntry {
    pub fn is_finite(&self) -> bool {
        self.sup.is_finite()
            && self.integral.is_finite()
            && self.sup_t.is_finite()
            && self.integral_t.is_finite()
    }
}

/// Fitted decay rates of `‖G̃‖₂` and `‖P̃‖₂`; reported, never asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub rate_gtilde: Option<f64>,
    pub rate_ptilde: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub build: String,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub steps: usize,
    pub linear_solver_iterations: usize,
    pub samples: usize,
    /// Whether vacuum (CNS) or the density floor (INS) was met.
    pub vacuum_or_regularized: bool,
    pub conservation: ConservationSummary,
    pub predictions: Predictions,
    pub fits: BTreeMap<String, FitEntry>,
    pub energy_balance: Option<EnergyBalance>,
    pub identities: Option<IdentitySummary>,
    pub ke_bound: Option<KeBound>,
    pub rate_comparison: Option<RateComparison>,
    pub weighted: BTreeMap<String, WeightedEntry>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
}

impl RunManifest {
    pub fn fit(&self, column: &str) -> Option<&DecayFit> {
        self.fits.get(column)?.fit.as_ref()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub rows: Vec<DiagnosticRow>,
    pub final_state: Snapshot,
}

enum Sim {
    Cns(CnsState),
    Ins(InsState),
}

impl Sim {
    fn time(&self) -> f64 {
        match self {
            Sim::Cns(s) => s.time,
            Sim::Ins(s) => s.time,
        }
    }

    fn set_time(&mut self, t: f64) {
        match self {
            Sim::Cns(s) => s.time = t,
            Sim::Ins(s) => s.time = t,
        }
    }

    fn stable_dt(&self, cfl: f64) -> f64 {
        match self {
            Sim::Cns(s) => stable_dt(s, cfl),
            Sim::Ins(s) => ins_stable_dt(s, cfl),
        }
    }

    /// Advance in place; returns linear-solver iterations.
    fn step(&mut self, dt: f64, cfl: f64) -> torusflow_core::Result<usize> {
        match self {
            Sim::Cns(s) => {
                let opts = StepOptions {
                    cfl,
                    ..StepOptions::default()
                };
                let (next, stats) = cns_step_with(s, dt, &opts)?;
                *s = next;
                Ok(stats.cg_iterations)
            }
            Sim::Ins(s) => {
                let opts = InsStepOptions {
                    cfl,
                    ..InsStepOptions::default()
                };
                let (next, stats) = ins_step_with(s, dt, &opts)?;
                *s = next;
                Ok(stats.viscous_iterations + stats.projection_iterations)
            }
        }
    }

    fn row(&self) -> DiagnosticRow {
        match self {
            Sim::Cns(s) => DiagnosticRow::cns(s),
            Sim::Ins(s) => DiagnosticRow::ins(s),
        }
    }

    fn energy_sample(&self, row: &DiagnosticRow) -> EnergySample {
        match self {
            Sim::Cns(s) => EnergySample::of(s),
            Sim::Ins(s) => {
                let g = vector_grad_norm(&s.u);
                EnergySample {
                    t: s.time,
                    energy: row.e,
                    dissipation: s.mu * g * g,
                }
            }
        }
    }

    fn mass_momentum(&self) -> (f64, [f64; 2]) {
        match self {
            Sim::Cns(s) => (s.mass(), s.total_momentum()),
            Sim::Ins(s) => (s.mass(), s.momentum()),
        }
    }

    fn density_range(&self) -> (f64, f64) {
        let rho = match self {
            Sim::Cns(s) => &s.rho,
            Sim::Ins(s) => &s.rho,
        };
        (rho.min(), rho.max())
    }

    fn flags_vacuum(&self) -> bool {
        match self {
            Sim::Cns(s) => s.rho.min() <= 0.0,
            Sim::Ins(s) => s.is_regularized(),
        }
    }

    fn snapshot(&self) -> Snapshot {
        match self {
            Sim::Cns(s) => Snapshot::Cns(s.clone()),
            Sim::Ins(s) => Snapshot::Ins(s.clone()),
        }
    }
}

fn setup(config: &RunConfig) -> Result<Sim> {
    config.validate()?;
    let grid = config.grid()?;
    let spec = config.initial_spec();
    let cfg_err = |e: torusflow_core::Error| HarnessError::Config(e.to_string());
    Ok(match config.system {
        System::Cns => {
            Sim::Cns(generate_initial_data(&spec, &grid, &config.cns_params()?).map_err(cfg_err)?)
        }
        System::Ins => Sim::Ins(ins_initial_data(&spec, &grid, config.params.mu).map_err(cfg_err)?),
    })
}

fn dump_failure(out_dir: Option<&Path>, snap: &Snapshot) -> Option<PathBuf> {
    let path = out_dir?.join(FAILURE_CHECKPOINT);
    checkpoint::save(&path, snap).ok().map(|_| path)
}

/// Integrate `config` to `t_end`, sampling every `diagnostic_interval`.
///
/// With an output directory, writes the CSV series, the final state, and then
/// the manifest (atomically, last). On a solver failure the state entering the
/// failing step is dumped there.
pub fn run_scenario(config: &RunConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    let clock = Instant::now();
    let mut sim = setup(config)?;
    let rho0 = match &sim {
        Sim::Cns(s) => s.rho.clone(),
        Sim::Ins(s) => s.rho.clone(),
    };
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| HarnessError::io(format!("create {}", dir.display()), e))?;
    }

    let (mass0, mom0) = sim.mass_momentum();
    let (mut rho_min, mut rho_max) = sim.density_range();
    let mut max_mass_drift: f64 = 0.0;
    let mut max_mom_drift: f64 = 0.0;
    let mut vacuum = sim.flags_vacuum();
    let mut steps = 0usize;
    let mut iterations = 0usize;

    let first = sim.row();
    let mut energy = vec![sim.energy_sample(&first)];
    let mut rows = vec![first];

    let interval = config.diagnostic_interval;
    let mut k = 1usize;
    loop {
        let target = (k as f64 * interval).min(config.t_end);
        let t = sim.time();
        let mut dt = match config.dt {
            Some(dt) => dt,
            None => sim.stable_dt(config.cfl),
        };
        let hit = t + dt >= target - 1e-9 * interval;
        if hit {
            dt = target - t;
        }
        let before = sim.snapshot();
        match sim.step(dt, config.cfl) {
            Ok(it) => iterations += it,
            Err(source) => {
                let dump = dump_failure(out_dir, &before);
                return Err(HarnessError::Solver {
                    time: t,
                    source,
                    dump,
                });
            }
        }
        steps += 1;
        let (mass, mom) = sim.mass_momentum();
        max_mass_drift = max_mass_drift.max((mass - mass0).abs() / mass0);
        max_mom_drift = max_mom_drift.max((mom[0] - mom0[0]).hypot(mom[1] - mom0[1]));
        let (lo, hi) = sim.density_range();
        rho_min = rho_min.min(lo);
        rho_max = rho_max.max(hi);
        vacuum |= sim.flags_vacuum();
        if hit {
            sim.set_time(target);
            let row = sim.row();
            energy.push(sim.energy_sample(&row));
            rows.push(row);
            if target >= config.t_end {
                break;
            }
            k += 1;
        }
    }

    let (mass1, mom1) = sim.mass_momentum();
    let conservation = ConservationSummary {
        mass_initial: mass0,
        mass_final: mass1,
        max_mass_drift,
        momentum_initial: mom0,
        momentum_final: mom1,
        momentum_drift_rate: max_mom_drift / config.t_end,
        rho_min,
        rho_max,
    };
    let final_state = sim.snapshot();
    let manifest = analyse(config, &rows, &energy, &rho0, conservation, |m| {
        m.build = build_id();
        m.started_unix_seconds = started;
        m.wall_clock_seconds = clock.elapsed().as_secs_f64();
        m.steps = steps;
        m.linear_solver_iterations = iterations;
        m.vacuum_or_regularized = vacuum;
    })?;

    if let Some(dir) = out_dir {
        write_series(&dir.join(SERIES_FILE), &rows)?;
        checkpoint::save(&dir.join(FINAL_CHECKPOINT), &final_state)?;
        let json = serde_json::to_vec_pretty(&manifest)?;
        checkpoint::write_atomic(&dir.join(MANIFEST_FILE), &json)?;
    }
    Ok(RunOutput {
        manifest,
        rows,
        final_state,
    })
}

pub fn write_series(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::io("flush csv", e.into_error()))?;
    checkpoint::write_atomic(path, &bytes)
}

pub fn read_series(path: &Path) -> Result<Vec<DiagnosticRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(HarnessError::from))
        .collect()
}

/// Time series of one CSV column; `None` when the column is empty for this system.
pub fn column_series(rows: &[DiagnosticRow], column: &str) -> Result<Option<TimeSeries>> {
    let mut s = TimeSeries::new(column, "diagnostic column");
    for r in rows {
        match r.column(column) {
            Some(v) => s.push(r.t, v)?,
            None if s.is_empty() => return Ok(None),
            None => {
                return Err(HarnessError::Config(format!(
                    "column {column} is partially empty"
                )))
            }
        }
    }
    Ok(Some(s))
}

const CNS_FITS: [&str; 9] = [
    "E",
    "KE",
    "PE",
    "D",
    "norm_grad_Pu_L2",
    "norm_div_u_L2",
    "norm_Gtilde_L2",
    "norm_Ptilde_L2",
    "norm_Gtilde_Linf",
];
const INS_FITS: [&str; 4] = ["E", "KE", "norm_grad_Pu_L2", "norm_Ptilde_L2"];
const WEIGHTED: [&str; 5] = [
    "E",
    "D",
    "norm_grad_Pu_L2",
    "norm_Gtilde_L2",
    "norm_Ptilde_L2",
];

fn analyse(
    config: &RunConfig,
    rows: &[DiagnosticRow],
    energy: &[EnergySample],
    rho0: &ScalarField,
    conservation: ConservationSummary,
    fill: impl FnOnce(&mut RunManifest),
) -> Result<RunManifest> {
    let window = config.fit_window.map(|[a, b]| (a, b));
    let mut fits = BTreeMap::new();
    let names: &[&str] = match config.system {
        System::Cns => &CNS_FITS,
        System::Ins => &INS_FITS,
    };
    let mut series = BTreeMap::new();
    for &name in names {
        let Some(s) = column_series(rows, name)? else {
            continue;
        };
        let entry = match fit_decay_or_zero(&s, window) {
            Ok(f) => FitEntry {
                fit: Some(f),
                error: None,
            },
            Err(e) => FitEntry {
                fit: None,
                error: Some(e.to_string()),
            },
        };
        fits.insert(name.to_string(), entry);
        series.insert(name, s);
    }
    let rate = |name: &str| {
        fits.get(name)
            .and_then(|e: &FitEntry| e.fit.map(|f| f.alpha))
    };

    let mut weighted = BTreeMap::new();
    for name in WEIGHTED {
        let Some(s) = series.get(name) else { continue };
        let beta = rate(name).filter(|a| *a > 0.0).map_or(0.0, |a| 0.5 * a);
        let acc = |sigma, red| weighted_norm_accumulator(s, beta, sigma, red);
        weighted.insert(
            name.to_string(),
            WeightedEntry {
                beta,
                sup: acc(0.0, Reduction::Sup)?,
                integral: acc(0.0, Reduction::Integral)?,
                sup_t: acc(1.0, Reduction::Sup)?,
                integral_t: acc(1.0, Reduction::Integral)?,
            },
        );
    }

    let energy_balance = if energy.len() >= 3 {
        let r = energy_balance_residual(energy)?;
        let max = r.values().fold(0.0f64, |m, v| m.max(v.abs()));
        let e0 = energy[0].energy;
        Some(EnergyBalance {
            max_abs_residual: max,
            relative: if e0 > 0.0 { max / e0 } else { max },
        })
    } else {
        None
    };

    let mut checks = BTreeMap::new();
    checks.insert(
        "mass_conservation".to_string(),
        conservation.max_mass_drift < MASS_TOL,
    );
    checks.insert(
        "momentum_conservation".to_string(),
        conservation.momentum_drift_rate < MOMENTUM_RATE_TOL,
    );
    checks.insert(
        "density_nonnegative".to_string(),
        conservation.rho_min >= 0.0,
    );

    let mut predictions = Predictions {
        alpha0_shape: None,
        slowest_linear_rate: None,
        slowest_mode: None,
        beta1: None,
    };
    let mut identities = None;
    let mut ke_bound = None;
    let mut rate_comparison = None;
    let grid = config.grid()?;
    match config.system {
        System::Cns => {
            let p = config.cns_params()?;
            let rho_bar = conservation.mass_initial;
            let pred = predicted_alpha0(p.mu(), rho_bar, p.kappa(), p.gamma(), p.nu());
            predictions.alpha0_shape = Some(pred.alpha0_shape);
            if let Ok((r, mode)) =
                slowest_linear_rate(&grid, p.mu(), p.nu(), p.pressure_derivative_at(rho_bar))
            {
                predictions.slowest_linear_rate = Some(r);
                predictions.slowest_mode = Some(mode);
            }
            let max_of = |f: fn(&DiagnosticRow) -> Option<f64>| {
                rows.iter().filter_map(f).fold(0.0f64, f64::max)
            };
            let id = IdentitySummary {
                max_flux_identity: max_of(|r| r.res_flux_id),
                max_elliptic: max_of(|r| r.res_elliptic),
                max_helmholtz: max_of(|r| r.res_helmholtz),
            };
            checks.insert(
                "identities".to_string(),
                id.max_flux_identity < IDENTITY_TOL
                    && id.max_elliptic < IDENTITY_TOL
                    && id.max_helmholtz < IDENTITY_TOL,
            );
            identities = Some(id);
            let (g, pt) = (rate("norm_Gtilde_L2"), rate("norm_Ptilde_L2"));
            let ratio = match (g, pt) {
                (Some(g), Some(p)) if p != 0.0 => Some(g / p),
                _ => None,
            };
            rate_comparison = Some(RateComparison {
                rate_gtilde: g,
                rate_ptilde: pt,
                ratio,
            });
        }
        System::Ins => {
            // A constant density factor m is equivalent to viscosity μ/m with unit mean density.
            let m = rho0.mean();
            let b1 = beta1(&rho0.scale(1.0 / m), config.params.mu / m, &grid)?;
            predictions.beta1 = Some(b1);
            let ke0 = rows[0].ke;
            let worst = rows
                .iter()
                .map(|r| {
                    if ke0 > 0.0 {
                        r.ke / (ke0 * (-b1 * r.t).exp())
                    } else {
                        0.0
                    }
                })
                .fold(0.0f64, f64::max);
            let monotonicity_violations = rows
                .windows(2)
                .filter(|w| w[1].ke > w[0].ke * (1.0 + 1e-12))
                .count();
            checks.insert("ke_bound".to_string(), worst <= KE_BOUND_FACTOR);
            ke_bound = Some(KeBound {
                beta1: b1,
                worst_ratio: worst,
                factor: KE_BOUND_FACTOR,
                monotonicity_violations,
            });
            let div_ok = rows.iter().all(|r| {
                r.norm_div_u_l2 <= DIVERGENCE_TOL * r.norm_grad_pu_l2.max(f64::MIN_POSITIVE)
            });
            checks.insert("divergence_free".to_string(), div_ok);
        }
    }

    let passed = checks.values().all(|&v| v);
    let mut manifest = RunManifest {
        config: config.clone(),
        build: String::new(),
        started_unix_seconds: 0.0,
        wall_clock_seconds: 0.0,
        steps: 0,
        linear_solver_iterations: 0,
        samples: rows.len(),
        vacuum_or_regularized: false,
        conservation,
        predictions,
        fits,
        energy_balance,
        identities,
        ke_bound,
        rate_comparison,
        weighted,
        checks,
        passed,
    };
    fill(&mut manifest);
    Ok(manifest)
}
