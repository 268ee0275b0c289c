//! Closed-form predictions from the linearization of the compressible system about `(ρ̄, 0)`.
//!
//! Per Fourier mode the density perturbation `a` and the divergence `d` obey
//! `a' = −d`, `d' = −ν|k|²d + P′|k|²a`, whose characteristic polynomial is
//! `λ² + ν|k|²λ + P′|k|² = 0`. The solenoidal part decays like `e^{−μ|k|²t}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::TorusGrid;

/// Relative discriminant threshold below which the double-root formula is used.
pub const CONFLUENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub k: [i64; 2],
    pub k_mag2: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub lambda_parabolic: f64,
    /// `R_k = √(1 − 4P′/(ν²|k|²))`, imaginary when the radicand is negative.
    pub r_k: Complex64,
}

/// Roots `λ± = −(ν|k|²/2)(1 ± R_k)` of `λ² + ν|k|²λ + P′|k|² = 0`.
pub fn acoustic_eigenvalues(
    nu: f64,
    k_mag2: f64,
    p_prime: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    if !(k_mag2 > 0.0) {
        return Err(Error::InvalidParameter("|k|² must be positive".into()));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter("ν must be positive".into()));
    }
    let b = nu * k_mag2;
    let c = p_prime * k_mag2;
    let radicand = 1.0 - 4.0 * c / (b * b);
    let r = Complex64::new(radicand, 0.0).sqrt();
    let half = -0.5 * b;
    // Cancellation-free root: λ⁻ from Vieta when roots are real.
    if radicand > 0.0 {
        let lp = half * (1.0 + radicand.sqrt());
        let lm = c / lp;
        Ok((Complex64::new(lp, 0.0), Complex64::new(lm, 0.0), r))
    } else {
        Ok((half * (1.0 + r), half * (1.0 - r), r))
    }
}

pub fn parabolic_eigenvalue(mu: f64, k_mag2: f64) -> f64 {
    -mu * k_mag2
}

/// Fast acoustic branch `λ⁺`, the linear rate attributed to the effective flux.
pub fn g_mode_rate(nu: f64, k_mag2: f64, p_prime: f64) -> Result<f64> {
    Ok(acoustic_eigenvalues(nu, k_mag2, p_prime)?.0.re)
}

pub fn mode_spectrum(
    k: [i64; 2],
    k_mag2: f64,
    mu: f64,
    nu: f64,
    p_prime: f64,
) -> Result<ModeSpectrum> {
    let (lp, lm, r) = acoustic_eigenvalues(nu, k_mag2, p_prime)?;
    Ok(ModeSpectrum {
        k,
        k_mag2,
        lambda_plus: lp,
        lambda_minus: lm,
        lambda_parabolic: parabolic_eigenvalue(mu, k_mag2),
        r_k: r,
    })
}

/// Exact solution of the 2×2 mode system at time `t`.
pub fn evolve_linear_mode(
    a0: f64,
    d0: f64,
    nu: f64,
    k_mag2: f64,
    p_prime: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let b = nu * k_mag2;
    let c = p_prime * k_mag2;
    let disc = b * b - 4.0 * c;
    if disc.abs() < CONFLUENT_TOL * nu * nu * k_mag2 {
        // Double root λ = −b/2: y(t) = e^{λt}(y₀ + t(M − λI)y₀).
        let l = -0.5 * b;
        let e = (l * t).exp();
        let ma = -d0 - l * a0;
        let md = c * a0 - b * d0 - l * d0;
        return Ok((e * (a0 + t * ma), e * (d0 + t * md)));
    }
    let (lp, lm, _) = acoustic_eigenvalues(nu, k_mag2, p_prime)?;
    // a(t) = α e^{λ⁺t} + β e^{λ⁻t}, a'(0) = −d0.
    let a0c = Complex64::new(a0, 0.0);
    let da = Complex64::new(-d0, 0.0);
    let alpha = (da - lm * a0c) / (lp - lm);
    let beta = a0c - alpha;
    let ep = (lp * t).exp();
    let em = (lm * t).exp();
    let a = alpha * ep + beta * em;
    let d = -(alpha * lp * ep + beta * lm * em);
    Ok((a.re, d.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPrediction {
    /// `min(μ/ρ̄, ρ̄P′(ρ̄)/ν)`.
    pub alpha0_shape: f64,
    /// Multiplier in front of the shape; `None` until a fit supplies it.
    pub undetermined_constant: Option<f64>,
    /// Grid mode with the slowest linear decay, when a grid was given.
    pub slowest_mode: Option<[i64; 2]>,
}

pub fn pressure_derivative(kappa: f64, gamma: f64, rho_bar: f64) -> f64 {
    kappa * gamma * rho_bar.powf(gamma - 1.0)
}

pub fn predicted_alpha0(mu: f64, rho_bar: f64, kappa: f64, gamma: f64, nu: f64) -> DecayPrediction {
    let pp = pressure_derivative(kappa, gamma, rho_bar);
    DecayPrediction {
        alpha0_shape: (mu / rho_bar).min(rho_bar * pp / nu),
        undetermined_constant: None,
        slowest_mode: None,
    }
}

/// Slowest linear decay over all nonzero grid modes: `min_k min(−Re λ⁻ₖ, μ|k|²)`.
/// Returns the rate (positive) and the mode achieving it.
pub fn slowest_linear_rate(
    grid: &TorusGrid,
    mu: f64,
    nu: f64,
    p_prime: f64,
) -> Result<(f64, [i64; 2])> {
    let [n0, n1] = grid.resolution();
    let mut best = (f64::INFINITY, [0, 0]);
    for j in 0..n1 {
        for i in 0..n0 {
            let k2 = grid.k_mag2(i, j);
            if k2 == 0.0 {
                continue;
            }
            let (_, lm, _) = acoustic_eigenvalues(nu, k2, p_prime)?;
            let rate = (-lm.re).min(mu * k2);
            if rate < best.0 {
                best = (rate, [grid.modes(0)[i], grid.modes(1)[j]]);
            }
        }
    }
    Ok(best)
}

/// Prediction with the slowest grid mode filled in.
pub fn predicted_alpha0_on_grid(
    grid: &TorusGrid,
    mu: f64,
    rho_bar: f64,
    kappa: f64,
    gamma: f64,
    nu: f64,
) -> Result<DecayPrediction> {
    let mut p = predicted_alpha0(mu, rho_bar, kappa, gamma, nu);
    let (_, k) = slowest_linear_rate(grid, mu, nu, pressure_derivative(kappa, gamma, rho_bar))?;
    p.slowest_mode = Some(k);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_examples() {
        let (lp, lm, r) = acoustic_eigenvalues(2.0, 1.0, 1.0).unwrap();
        assert!((lp.re + 1.0).abs() < 1e-12 && (lm.re + 1.0).abs() < 1e-12 && r.norm() < 1e-12);
        let (lp, lm, _) = acoustic_eigenvalues(10.0, 1.0, 1.0).unwrap();
        assert!((lm.re + 0.1010205).abs() < 1e-7);
        assert!((lp.re + 9.8989795).abs() < 1e-7);
        assert!(acoustic_eigenvalues(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn radicand_form_for_unit_pressure_slope() {
        // With P′ = 1: R_k = √(1 − 4/(ν²|k|²)).
        for &nu in &[3.0f64, 10.0, 50.0] {
            let k2: f64 = 2.0;
            let r = (1.0 - 4.0 / (nu * nu * k2)).sqrt();
            let (lp, lm, rk) = acoustic_eigenvalues(nu, k2, 1.0).unwrap();
            assert!((rk.re - r).abs() < 1e-14);
            assert!((lp.re + nu * k2 / 2.0 * (1.0 + r)).abs() < 1e-10);
            assert!((lm.re + nu * k2 / 2.0 * (1.0 - r)).abs() < 1e-10);
        }
    }

    #[test]
    fn parabolic_and_g_rate() {
        assert_eq!(parabolic_eigenvalue(1.0, 1.0), -1.0);
        assert_eq!(parabolic_eigenvalue(2.0, 4.0), -8.0);
        assert!((g_mode_rate(10.0, 1.0, 1.0).unwrap() + 9.899).abs() < 1e-3);
        let g = g_mode_rate(100.0, 1.0, 1.0).unwrap();
        assert!((g / -100.0 - 1.0).abs() < 1e-3);
        let (lp, lm, _) = acoustic_eigenvalues(100.0, 1.0, 1.0).unwrap();
        assert!(((lp.re / lm.re) / 1e4 - 1.0).abs() < 0.02);
    }

    #[test]
    fn alpha0_examples() {
        assert!((predicted_alpha0(1.0, 1.0, 1.0, 1.0, 10.0).alpha0_shape - 0.1).abs() < 1e-15);
        let r = predicted_alpha0(1.0, 1.0, 1.0, 1.0, 40.0).alpha0_shape
            / predicted_alpha0(1.0, 1.0, 1.0, 1.0, 20.0).alpha0_shape;
        assert!((r - 0.5).abs() < 1e-15);
        assert!((predicted_alpha0(0.01, 1.0, 1.0, 1.0, 2.0).alpha0_shape - 0.01).abs() < 1e-15);
    }

    #[test]
    fn evolve_identity_and_eigenvector() {
        let (a, d) = evolve_linear_mode(0.3, -0.7, 5.0, 2.0, 1.5, 0.0).unwrap();
        assert!((a - 0.3).abs() < 1e-15 && (d + 0.7).abs() < 1e-15);
        let (_, lm, _) = acoustic_eigenvalues(10.0, 1.0, 1.0).unwrap();
        // a' = −d = λa on the eigenvector.
        let d0 = -lm.re;
        for &t in &[0.5, 2.0, 7.0] {
            let (a, d) = evolve_linear_mode(1.0, d0, 10.0, 1.0, 1.0, t).unwrap();
            let e = (lm.re * t).exp();
            assert!((a - e).abs() < 1e-12 && (d - d0 * e).abs() < 1e-12);
        }
    }
}
