//! Two-sided evaluation of the weighted Poincaré, Sobolev and interpolation
//! inequalities on the torus, and of the pressure/energy equivalence.
//!
//! Inequalities whose constants are explicit (`c` the sharp Poincaré constant
//! of the torus) count violations. The others report the worst ratio
//! `LHS / (RHS without its constant)` as a fitted constant.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cns::{random_band_limited, CnsParams};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::spectral::{grad_norm, poincare_constant, strip_nyquist, ScalarField, TorusGrid};

/// Relative slack allowed on a sharp inequality before a sample counts as a violation.
pub const VIOLATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `‖z‖² ≤ |M|(|M| + 2c‖a−1‖‖∇z‖) + c²‖a‖²‖∇z‖²`, `M = mean(az)`.
    WeightedPoincare,
    /// `‖z‖_p ≤ C‖a‖‖z‖^{2/p}‖∇z‖^{1−2/p}` for `mean(az) = 0`.
    GagliardoNirenberg,
    /// `‖z‖_p ≤ C c^{2/p}‖a‖‖∇z‖` for `mean(az) = 0`.
    Sobolev,
    /// `‖z‖ ≤ |mean(az)| + √2 c‖a‖‖∇z‖`.
    TimeDerivativeBound,
    /// `‖z‖ ≤ c‖a‖‖∇z‖` for `mean(az) = 0`.
    WeightedMeanFreePoincare,
    /// `‖z̃‖₄ ≤ C‖z̃‖^{1/2}‖∇z‖^{1/2}`.
    L4Interpolation,
    /// `‖z̃‖_r ≤ C‖z̃‖^{2/r}‖∇z‖^{1−2/r}`.
    LrInterpolation,
}

impl InequalityId {
    pub const ALL: [InequalityId; 7] = [
        InequalityId::WeightedPoincare,
        InequalityId::GagliardoNirenberg,
        InequalityId::Sobolev,
        InequalityId::TimeDerivativeBound,
        InequalityId::WeightedMeanFreePoincare,
        InequalityId::L4Interpolation,
        InequalityId::LrInterpolation,
    ];

    /// Whether every constant in the inequality is explicit.
    pub fn is_sharp(self) -> bool {
        matches!(
            self,
            InequalityId::WeightedPoincare | InequalityId::WeightedMeanFreePoincare
        )
    }

    /// Constants explicit but not hard-asserted.
    fn has_explicit_constant(self) -> bool {
        self.is_sharp() || self == InequalityId::TimeDerivativeBound
    }

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::WeightedPoincare => "weighted_poincare",
            InequalityId::GagliardoNirenberg => "gagliardo_nirenberg",
            InequalityId::Sobolev => "sobolev",
            InequalityId::TimeDerivativeBound => "time_derivative_bound",
            InequalityId::WeightedMeanFreePoincare => "weighted_mean_free_poincare",
            InequalityId::L4Interpolation => "l4_interpolation",
            InequalityId::LrInterpolation => "lr_interpolation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub trials: usize,
    /// Samples with `LHS > (1 + VIOLATION_TOL)·RHS`; only counted for explicit constants.
    pub violations: usize,
    pub worst_ratio: f64,
    /// Worst `LHS/RHS` when the constant is implicit.
    pub fitted_constant: Option<f64>,
}

impl InequalityReport {
    pub fn empty(id: InequalityId) -> Self {
        InequalityReport {
            id,
            trials: 0,
            violations: 0,
            worst_ratio: 0.0,
            fitted_constant: if id.has_explicit_constant() {
                None
            } else {
                Some(0.0)
            },
        }
    }

    pub fn merge(&mut self, other: &InequalityReport) {
        debug_assert_eq!(self.id, other.id);
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
        if let (Some(a), Some(b)) = (self.fitted_constant, other.fitted_constant) {
            self.fitted_constant = Some(a.max(b));
        }
    }

    /// A failure of a hard-asserted inequality.
    pub fn hard_failure(&self) -> bool {
        self.id.is_sharp() && self.violations > 0
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Evaluate one inequality on `(a, z)`. `p` is the Lebesgue exponent of the
/// Gagliardo-Nirenberg, Sobolev and `L_r` forms and is ignored elsewhere.
///
/// `z` loses its Nyquist modes; forms that require `mean(az) = 0` subtract
/// `mean(az)` from `z` first, which is exact because `mean(a) = 1`.
pub fn check_inequality(
    id: InequalityId,
    a: &ScalarField,
    z: &ScalarField,
    p: f64,
) -> Result<InequalityReport> {
    crate::spectral::check_same(a.grid(), z.grid())?;
    let mean_a = a.mean();
    if (mean_a - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "weight must have mean 1, got {mean_a}"
        )));
    }
    if matches!(
        id,
        InequalityId::GagliardoNirenberg | InequalityId::Sobolev | InequalityId::LrInterpolation
    ) && !(p >= 2.0 && p.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "exponent must lie in [2, ∞), got {p}"
        )));
    }
    let c = poincare_constant(a.grid());
    let z = strip_nyquist(z);
    let m = a.dot(&z);
    let a_norm = a.l2_norm();
    let z0 = z.map(|v| v - m);
    let zt = z.remove_mean();
    let gz = grad_norm(&z);

    let (lhs, rhs) = match id {
        InequalityId::WeightedPoincare => {
            let am1 = a.map(|v| v - 1.0).l2_norm();
            let lhs = z.l2_norm().powi(2);
            (
                lhs,
                m.abs() * (m.abs() + 2.0 * c * am1 * gz) + c * c * a_norm * a_norm * gz * gz,
            )
        }
        InequalityId::GagliardoNirenberg => (
            z0.lp_norm(p),
            a_norm * z0.l2_norm().powf(2.0 / p) * gz.powf(1.0 - 2.0 / p),
        ),
        InequalityId::Sobolev => (z0.lp_norm(p), c.powf(2.0 / p) * a_norm * gz),
        InequalityId::TimeDerivativeBound => (z.l2_norm(), m.abs() + 2f64.sqrt() * c * a_norm * gz),
        InequalityId::WeightedMeanFreePoincare => (z0.l2_norm(), c * a_norm * gz),
        InequalityId::L4Interpolation => (zt.lp_norm(4.0), (zt.l2_norm() * gz).sqrt()),
        InequalityId::LrInterpolation => (
            zt.lp_norm(p),
            zt.l2_norm().powf(2.0 / p) * gz.powf(1.0 - 2.0 / p),
        ),
    };
    let r = ratio(lhs, rhs);
    let mut rep = InequalityReport::empty(id);
    rep.trials = 1;
    rep.worst_ratio = r;
    if id.has_explicit_constant() {
        rep.violations = usize::from(r > 1.0 + VIOLATION_TOL);
    } else {
        rep.fitted_constant = Some(r);
    }
    Ok(rep)
}

/// Random weight `a ≥ 0` with mean 1, vacuum allowed, and a random band-limited `z`.
pub fn random_pair(grid: &Arc<TorusGrid>, rng: &mut ChaCha8Rng) -> (ScalarField, ScalarField) {
    let max_mode = grid.resolution()[0].min(grid.resolution()[1]) / 2 - 1;
    let ma = rng.gen_range(1..=max_mode.clamp(1, 6));
    let phi = random_band_limited(grid, ma, rng);
    let scale = phi.lp_norm(f64::INFINITY).max(f64::MIN_POSITIVE);
    let s: f64 = rng.gen_range(0.0..3.0);
    let b = phi.map(|v| (1.0 + s * v / scale).max(0.0));
    let mb = b.mean();
    let a = b.map(|v| v / mb);
    let mz = rng.gen_range(1..=max_mode.clamp(1, 8));
    let offset: f64 = rng.gen_range(-1.0..1.0);
    let z = random_band_limited(grid, mz, rng).map(|v| v + offset);
    (a, z)
}

/// `F₁(s) = γ∫₀¹(1 + τ(s−1))^{γ−1} dτ` by adaptive quadrature.
pub fn f1(s: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "γ must be at least 1, got {gamma}"
        )));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("F₁ needs s ≥ 0, got {s}")));
    }
    if gamma == 1.0 {
        return Ok(1.0);
    }
    let integral = adaptive_simpson(
        |t| (1.0 + t * (s - 1.0)).max(0.0).powf(gamma - 1.0),
        0.0,
        1.0,
        1e-14,
    );
    Ok(gamma * integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub gamma: f64,
    pub rho_bar: f64,
    pub rho_star: f64,
    pub trials: usize,
    /// `F₁(ρ*/ρ̄)`.
    pub f1_star: f64,
    /// Samples whose ratio `(P(ρ) − P(ρ̄))/(ρ̄^{γ−1}a)` leaves `[1, F₁(ρ*/ρ̄)]`.
    pub pressure_violations: usize,
    /// Smallest `e(ρ)/(ρ̄^{γ−2}a²)` (the fitted `c_γ`).
    pub c_gamma: f64,
    /// Largest `e(ρ)/(ρ̄^{γ−2}a²F₁(ρ*/ρ̄))` (the fitted `C`).
    pub c_upper: f64,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.pressure_violations == 0 && self.c_gamma > 0.0 && self.c_upper.is_finite()
    }
}

/// Two-sided bounds between `P(ρ) − P(ρ̄)`, `e(ρ)` and `a = ρ − ρ̄` for `P = ρ^γ`
/// at each sampled density in `[0, ρ*]`. Samples with `a = 0` are skipped.
pub fn check_energy_equivalence(
    rho: &[f64],
    rho_bar: f64,
    rho_star: f64,
    gamma: f64,
) -> Result<EquivalenceReport> {
    let params = CnsParams::new(1.0, 0.0, 1.0, gamma)?;
    if !(rho_bar > 0.0 && rho_star >= rho_bar) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < ρ̄ ≤ ρ*, got ρ̄ = {rho_bar}, ρ* = {rho_star}"
        )));
    }
    let f1_star = f1(rho_star / rho_bar, gamma)?;
    let p_bar = params.pressure_at(rho_bar);
    let mut rep = EquivalenceReport {
        gamma,
        rho_bar,
        rho_star,
        trials: 0,
        f1_star,
        pressure_violations: 0,
        c_gamma: f64::INFINITY,
        c_upper: 0.0,
    };
    for &r in rho {
        if !(r >= 0.0 && r <= rho_star) {
            return Err(Error::InvalidParameter(format!(
                "density sample {r} outside [0, {rho_star}]"
            )));
        }
        let a = r - rho_bar;
        if a == 0.0 {
            continue;
        }
        rep.trials += 1;
        let q = (params.pressure_at(r) - p_bar) / (rho_bar.powf(gamma - 1.0) * a);
        if q < 1.0 - 1e-9 || q > f1_star * (1.0 + 1e-9) {
            rep.pressure_violations += 1;
        }
        let e = params.potential_energy_at(r, rho_bar) / (rho_bar.powf(gamma - 2.0) * a * a);
        rep.c_gamma = rep.c_gamma.min(e);
        rep.c_upper = rep.c_upper.max(e / f1_star);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn grid() -> Arc<TorusGrid> {
        make_grid([2.0 * PI, 2.0 * PI], [32, 32]).unwrap()
    }

    #[test]
    fn poincare_is_sharp_on_first_mode() {
        let g = grid();
        let a = ScalarField::constant(&g, 1.0);
        let z = ScalarField::from_fn(&g, |x, _| x.cos());
        let r = check_inequality(InequalityId::WeightedPoincare, &a, &z, 2.0).unwrap();
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.violations, 0);
        let r = check_inequality(InequalityId::WeightedMeanFreePoincare, &a, &z, 2.0).unwrap();
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_z_meets_weighted_poincare() {
        let g = grid();
        let a = ScalarField::from_fn(&g, |x, y| 1.0 + 0.5 * (x + 2.0 * y).sin());
        let z = ScalarField::constant(&g, 1.7);
        let r = check_inequality(InequalityId::WeightedPoincare, &a, &z, 2.0).unwrap();
        assert!((r.worst_ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn rejects_weight_without_unit_mean() {
        let g = grid();
        let a = ScalarField::constant(&g, 1.1);
        let z = ScalarField::from_fn(&g, |x, _| x.cos());
        assert!(check_inequality(InequalityId::WeightedPoincare, &a, &z, 2.0).is_err());
    }

    #[test]
    fn random_corpus_has_no_sharp_violations() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut reports: Vec<_> = InequalityId::ALL
            .iter()
            .map(|&id| InequalityReport::empty(id))
            .collect();
        for _ in 0..200 {
            let (a, z) = random_pair(&g, &mut rng);
            assert!(a.min() >= 0.0);
            for rep in reports.iter_mut() {
                rep.merge(&check_inequality(rep.id, &a, &z, 6.0).unwrap());
            }
        }
        for rep in &reports {
            assert_eq!(rep.trials, 200);
            assert_eq!(rep.violations, 0, "{:?}", rep);
            assert!(rep.worst_ratio.is_finite());
        }
    }

    #[test]
    fn f1_examples() {
        for gamma in [1.0, 1.4, 2.0, 3.0] {
            assert!((f1(0.0, gamma).unwrap() - 1.0).abs() < 1e-12);
            assert!((f1(1.0, gamma).unwrap() - gamma).abs() < 1e-12);
        }
        assert!((f1(3.0, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(f1(1.0, 0.5).is_err());
        // (s^γ − 1)/(s − 1) for s ≠ 1.
        for &(s, gamma) in &[(0.3, 1.7), (2.5, 1.4), (4.0, 3.0)] {
            let closed = (f64::powf(s, gamma) - 1.0) / (s - 1.0);
            assert!((f1(s, gamma).unwrap() - closed).abs() < 1e-11);
        }
    }

    #[test]
    fn equivalence_on_lattice() {
        for gamma in [1.0, 1.4, 2.0] {
            let lattice: Vec<f64> = (0..=300).map(|i| 0.01 * i as f64).collect();
            let r = check_energy_equivalence(&lattice, 1.0, 3.0, gamma).unwrap();
            assert!(r.holds(), "{:?}", r);
            assert!(r.c_gamma > 0.0 && r.c_gamma <= 1.0);
        }
    }
}
