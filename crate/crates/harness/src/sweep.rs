//! Viscosity sweeps: one independent run per `ν`, executed in parallel.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::write_atomic;
use crate::config::{RunConfig, System};
use crate::error::{HarnessError, Result};
use crate::run::{run_scenario, RunManifest};

pub const SWEEP_FILE: &str = "sweep.json";
/// Allowed deviation of the pressure-rate slope from −1.
pub const SLOPE_TOL: f64 = 0.15;
/// Allowed relative spread `(max − min)/min` of the `∇ℙu` rate.
pub const PU_SPREAD_TOL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nu: f64,
    pub alpha0_shape: Option<f64>,
    pub slowest_linear_rate: Option<f64>,
    pub rate_ptilde: f64,
    pub r2_ptilde: f64,
    pub rate_grad_pu: f64,
    pub r2_grad_pu: f64,
    pub rate_gtilde: Option<f64>,
    /// `rate(G̃)/rate(P̃)`; reported only.
    pub ratio_g_p: Option<f64>,
    pub run_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln rate(‖P̃‖₂)` against `ln ν`.
    pub slope_ptilde: f64,
    pub slope_grad_pu: f64,
    pub spread_grad_pu: f64,
    pub crossover_nu: f64,
    pub slope_ok: bool,
    pub grad_pu_ok: bool,
    pub passed: bool,
    pub manifests: Vec<RunManifest>,
}

/// `ν` beyond which the acoustic rate `ρ̄P′(ρ̄)/ν` drops below `μ/ρ̄`.
pub fn crossover_nu(template: &RunConfig) -> Result<f64> {
    let p = template.cns_params()?;
    let rho_bar = template.initial.rho_bar;
    Ok(rho_bar * rho_bar * p.pressure_derivative_at(rho_bar) / p.mu())
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    sxy / sxx
}

pub fn validate_sweep(template: &RunConfig, nus: &[f64]) -> Result<f64> {
    if template.system != System::Cns {
        return Err(HarnessError::Config(
            "sweeps need a compressible template".into(),
        ));
    }
    template.validate()?;
    if nus.len() < 3 {
        return Err(HarnessError::Config(format!(
            "a sweep needs at least 3 values of nu, got {}",
            nus.len()
        )));
    }
    let cross = crossover_nu(template)?;
    for &nu in nus {
        if !(nu > cross && nu.is_finite()) {
            return Err(HarnessError::Config(format!(
                "nu = {nu} is not above the acoustic crossover {cross:.4}"
            )));
        }
    }
    let mut sorted = nus.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(HarnessError::Config("duplicate nu values".into()));
    }
    Ok(cross)
}

fn fitted(m: &RunManifest, column: &str) -> Result<(f64, f64)> {
    m.fit(column)
        .map(|f| (f.alpha, f.r_squared))
        .ok_or_else(|| {
            let why = m
                .fits
                .get(column)
                .and_then(|e| e.error.clone())
                .unwrap_or_else(|| "missing".into());
            HarnessError::Assertion(format!("no decay fit for {column}: {why}"))
        })
}

/// Run `template` at every `ν` and regress the fitted rates against `ν`.
/// Each run writes into `out/nu_<ν>` when an output directory is given.
pub fn sweep(template: &RunConfig, nus: &[f64], out: Option<&Path>) -> Result<SweepReport> {
    let crossover = validate_sweep(template, nus)?;
    let manifests: Vec<RunManifest> = nus
        .par_iter()
        .map(|&nu| {
            let cfg = template.with_nu(nu);
            let dir = out.map(|o| o.join(format!("nu_{nu}")));
            run_scenario(&cfg, dir.as_deref()).map(|r| r.manifest)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (m, &nu) in manifests.iter().zip(nus) {
        let (rp, r2p) = fitted(m, "norm_Ptilde_L2")?;
        let (ru, r2u) = fitted(m, "norm_grad_Pu_L2")?;
        let rg = m.fit("norm_Gtilde_L2").map(|f| f.alpha);
        rows.push(SweepRow {
            nu,
            alpha0_shape: m.predictions.alpha0_shape,
            slowest_linear_rate: m.predictions.slowest_linear_rate,
            rate_ptilde: rp,
            r2_ptilde: r2p,
            rate_grad_pu: ru,
            r2_grad_pu: r2u,
            rate_gtilde: rg,
            ratio_g_p: rg.filter(|_| rp != 0.0).map(|g| g / rp),
            run_passed: m.passed,
        });
    }
    if let Some(r) = rows
        .iter()
        .find(|r| !(r.rate_ptilde > 0.0 && r.rate_grad_pu > 0.0))
    {
        return Err(HarnessError::Assertion(format!(
            "non-decaying fit at nu = {}",
            r.nu
        )));
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.nu.ln()).collect();
    let lp: Vec<f64> = rows.iter().map(|r| r.rate_ptilde.ln()).collect();
    let lu: Vec<f64> = rows.iter().map(|r| r.rate_grad_pu.ln()).collect();
    let slope_ptilde = slope(&lx, &lp);
    let slope_grad_pu = slope(&lx, &lu);
    let (umin, umax) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.rate_grad_pu), b.max(r.rate_grad_pu))
        });
    let spread_grad_pu = (umax - umin) / umin;
    let slope_ok = (slope_ptilde + 1.0).abs() <= SLOPE_TOL;
    let grad_pu_ok = spread_grad_pu < PU_SPREAD_TOL;
    let passed = slope_ok && grad_pu_ok && rows.iter().all(|r| r.run_passed);
    let report = SweepReport {
        rows,
        slope_ptilde,
        slope_grad_pu,
        spread_grad_pu,
        crossover_nu: crossover,
        slope_ok,
        grad_pu_ok,
        passed,
        manifests,
    };
    if let Some(dir) = out {
        write_atomic(&dir.join(SWEEP_FILE), &serde_json::to_vec_pretty(&report)?)?;
    }
    Ok(report)
}
