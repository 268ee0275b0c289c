//! Post-processing commands: decay fits of saved series and linear mode tables.

use std::path::Path;

use serde::{Deserialize, Serialize};
use torusflow_core::diagnostics::{fit_decay, DecayFit};
use torusflow_core::linear::{mode_spectrum, ModeSpectrum};

use crate::checkpoint::write_atomic;
use crate::error::{HarnessError, Result};
use crate::run::{column_series, read_series};

/// Fit `column` of a saved series over `window` (default: last two thirds).
pub fn fit_csv(path: &Path, column: &str, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let rows = read_series(path)?;
    let series = column_series(&rows, column)?.ok_or_else(|| {
        HarnessError::Config(format!("column {column} is empty in {}", path.display()))
    })?;
    Ok(fit_decay(&series, window)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSummary {
    pub nu: f64,
    pub mu: f64,
    pub p_prime: f64,
    pub kmax: i64,
    pub modes: usize,
    /// Smallest `−Re λ⁻ₖ` and its mode.
    pub slowest_acoustic_rate: f64,
    pub slowest_acoustic_mode: [i64; 2],
    /// Smallest `μ|k|²`.
    pub slowest_parabolic_rate: f64,
    pub slowest_rate: f64,
    /// Modes whose acoustic pair is complex (oscillatory).
    pub oscillatory_modes: usize,
}

/// Eigenvalues for every integer `k ≠ 0` with `|k|∞ ≤ kmax` on the `2π` torus,
/// one representative per `±k` pair.
pub fn linear_table(
    nu: f64,
    mu: f64,
    p_prime: f64,
    kmax: i64,
) -> Result<(Vec<ModeSpectrum>, LinearSummary)> {
    if kmax < 1 {
        return Err(HarnessError::Config(format!(
            "kmax must be at least 1, got {kmax}"
        )));
    }
    if !(mu > 0.0) || !(p_prime > 0.0) {
        return Err(HarnessError::Config(
            "mu and pprime must be positive".into(),
        ));
    }
    let mut modes = Vec::new();
    for kx in 0..=kmax {
        for ky in -kmax..=kmax {
            if kx == 0 && ky <= 0 {
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            modes.push(
                mode_spectrum([kx, ky], k2, mu, nu, p_prime)
                    .map_err(|e| HarnessError::Config(e.to_string()))?,
            );
        }
    }
    let slow =
        modes
            .iter()
            .map(|m| (-m.lambda_minus.re, m.k))
            .fold(
                (f64::INFINITY, [0, 0]),
                |a, b| if b.0 < a.0 { b } else { a },
            );
    let parabolic = modes
        .iter()
        .map(|m| -m.lambda_parabolic)
        .fold(f64::INFINITY, f64::min);
    let summary = LinearSummary {
        nu,
        mu,
        p_prime,
        kmax,
        modes: modes.len(),
        slowest_acoustic_rate: slow.0,
        slowest_acoustic_mode: slow.1,
        slowest_parabolic_rate: parabolic,
        slowest_rate: slow.0.min(parabolic),
        oscillatory_modes: modes.iter().filter(|m| m.lambda_plus.im != 0.0).count(),
    };
    Ok((modes, summary))
}

#[derive(Serialize)]
struct ModeRow {
    kx: i64,
    ky: i64,
    k2: f64,
    lambda_plus_re: f64,
    lambda_plus_im: f64,
    lambda_minus_re: f64,
    lambda_minus_im: f64,
    r_k_re: f64,
    r_k_im: f64,
    lambda_parabolic: f64,
}

pub fn write_linear_csv(path: &Path, modes: &[ModeSpectrum]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in modes {
        w.serialize(ModeRow {
            kx: m.k[0],
            ky: m.k[1],
            k2: m.k_mag2,
            lambda_plus_re: m.lambda_plus.re,
            lambda_plus_im: m.lambda_plus.im,
            lambda_minus_re: m.lambda_minus.re,
            lambda_minus_im: m.lambda_minus.im,
            r_k_re: m.r_k.re,
            r_k_im: m.r_k.im,
            lambda_parabolic: m.lambda_parabolic,
        })?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::io("flush csv", e.into_error()))?;
    write_atomic(path, &bytes)
}
