use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CnsParams, CnsState};
use crate::error::{Error, Result};
use crate::spectral::{div, ScalarField, TorusGrid, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    /// `ρ = ρ̄(1 + A·φ)` with a random band-limited `φ`, `max|φ| = 1`.
    SmoothPerturbation,
    /// Vacuum disk of the given radius at the box center.
    VacuumPatch,
    /// Two density levels: `levels[0]` inside a disk, `levels[1]` outside.
    DiscontinuousDensity,
    /// `ρ = ρ̄(1 + A cos(2πx/L₁))`, `u = B·(sin(2πy/L₂), 0)`.
    AcousticMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    pub kind: InitialDataKind,
    /// Relative density perturbation for smooth and acoustic data.
    #[serde(default)]
    pub amplitude: f64,
    /// Width of the Gaussian mollifier in grid cells; 0 disables it.
    #[serde(default = "default_width")]
    pub mollification_width: f64,
    /// Divergence budget `K` in `‖div u₀‖₂ ≤ K ν^{−1/2}`.
    #[serde(default = "default_k")]
    pub k_budget: f64,
    #[serde(default)]
    pub seed: u64,
    /// RMS of the random velocity (or `B` for acoustic data).
    #[serde(default = "default_velocity")]
    pub velocity_amplitude: f64,
    #[serde(default = "default_rho_bar")]
    pub rho_bar: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_levels")]
    pub levels: [f64; 2],
    /// Largest integer frequency in the random fields.
    #[serde(default = "default_max_mode")]
    pub max_mode: usize,
}

fn default_width() -> f64 {
    2.0
}
fn default_k() -> f64 {
    1.0
}
fn default_velocity() -> f64 {
    0.1
}
fn default_rho_bar() -> f64 {
    1.0
}
fn default_radius() -> f64 {
    1.0
}
fn default_levels() -> [f64; 2] {
    [0.5, 2.0]
}
fn default_max_mode() -> usize {
    3
}

impl InitialDataSpec {
    pub fn new(kind: InitialDataKind) -> Self {
        InitialDataSpec {
            kind,
            amplitude: 0.0,
            mollification_width: default_width(),
            k_budget: default_k(),
            seed: 0,
            velocity_amplitude: default_velocity(),
            rho_bar: default_rho_bar(),
            radius: default_radius(),
            levels: default_levels(),
            max_mode: default_max_mode(),
        }
    }
}

/// Random real trigonometric polynomial with `|m|∞ ≤ max_mode`, coefficients decaying like `1/(1+|k|²)`.
pub fn random_band_limited(
    grid: &Arc<TorusGrid>,
    max_mode: usize,
    rng: &mut ChaCha8Rng,
) -> ScalarField {
    let [l0, l1] = grid.lengths();
    let mm = max_mode as i64;
    let mut terms = Vec::new();
    for mx in 0..=mm {
        for my in -mm..=mm {
            if mx == 0 && my <= 0 {
                continue;
            }
            let kx = 2.0 * PI * mx as f64 / l0;
            let ky = 2.0 * PI * my as f64 / l1;
            let w = 1.0 / (1.0 + kx * kx + ky * ky);
            let a: f64 = rng.gen_range(-1.0..1.0) * w;
            let b: f64 = rng.gen_range(-1.0..1.0) * w;
            terms.push((kx, ky, a, b));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(kx, ky, a, b)| {
                let p = kx * x + ky * y;
                a * p.cos() + b * p.sin()
            })
            .sum()
    })
}

/// Circular convolution with a normalized discrete Gaussian of `width` cells per direction.
/// Preserves the mean and the pointwise bounds of the input.
pub fn mollify(s: &ScalarField, width: f64) -> ScalarField {
    if width <= 0.0 {
        return s.clone();
    }
    let g = s.grid().clone();
    let [n0, n1] = g.resolution();
    let reach = (4.0 * width).ceil() as i64;
    let mut w: Vec<f64> = (-reach..=reach)
        .map(|d| (-0.5 * (d as f64 / width).powi(2)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let v = s.values();
    let mut tmp = vec![0.0; v.len()];
    for j in 0..n1 {
        for i in 0..n0 {
            let mut acc = 0.0;
            for (t, &wt) in w.iter().enumerate() {
                let ii = (i as i64 + t as i64 - reach).rem_euclid(n0 as i64) as usize;
                acc += wt * v[j * n0 + ii];
            }
            tmp[j * n0 + i] = acc;
        }
    }
    let mut out = vec![0.0; v.len()];
    for j in 0..n1 {
        for i in 0..n0 {
            let mut acc = 0.0;
            for (t, &wt) in w.iter().enumerate() {
                let jj = (j as i64 + t as i64 - reach).rem_euclid(n1 as i64) as usize;
                acc += wt * tmp[jj * n0 + i];
            }
            out[j * n0 + i] = acc;
        }
    }
    let lo = s.min();
    let hi = s.max();
    ScalarField::from_values(&g, out.into_iter().map(|x| x.clamp(lo, hi)).collect())
        .expect("same grid size")
}

fn disk_indicator(grid: &Arc<TorusGrid>, radius: f64) -> Result<ScalarField> {
    let [l0, l1] = grid.lengths();
    if !(radius > 0.0) || 2.0 * radius >= l0.min(l1) {
        return Err(Error::InfeasibleInitialData(format!(
            "disk radius {radius} must be positive and smaller than half the box ({:.4})",
            0.5 * l0.min(l1)
        )));
    }
    let (cx, cy) = (0.5 * l0, 0.5 * l1);
    Ok(ScalarField::from_fn(grid, |x, y| {
        if (x - cx).hypot(y - cy) < radius {
            1.0
        } else {
            0.0
        }
    }))
}

/// Build initial data satisfying `∫ρ₀u₀ = 0` and `‖div u₀‖₂ ≤ Kν^{−1/2}`.
pub fn generate_initial_data(
    spec: &InitialDataSpec,
    grid: &Arc<TorusGrid>,
    params: &CnsParams,
) -> Result<CnsState> {
    if !(spec.k_budget > 0.0) {
        return Err(Error::InfeasibleInitialData(
            "divergence budget K must be positive".into(),
        ));
    }
    let (rho, mut u) = initial_fields(spec, grid)?;
    let budget = spec.k_budget / params.nu().sqrt();
    let dn = div(&u).l2_norm();
    if dn > budget {
        u = u.scale(budget / dn);
    }
    let u = remove_mean_momentum(&rho, &u)?;
    CnsState::from_velocity(rho, u, *params, 0.0)
}

/// `u − mean(ρu)/mean(ρ)`, so that the momentum has zero mean.
pub(crate) fn remove_mean_momentum(rho: &ScalarField, u: &VectorField) -> Result<VectorField> {
    let mass = rho.mean();
    if !(mass > 0.0) {
        return Err(Error::InfeasibleInitialData("density has zero mass".into()));
    }
    let pm = u.mul_scalar(rho).mean();
    Ok(u.add_constant([-pm[0] / mass, -pm[1] / mass]))
}

/// Density and raw velocity described by `spec`, before any constraint is imposed.
pub(crate) fn initial_fields(
    spec: &InitialDataSpec,
    grid: &Arc<TorusGrid>,
) -> Result<(ScalarField, VectorField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    if !(spec.rho_bar > 0.0) {
        return Err(Error::InfeasibleInitialData(format!(
            "rho_bar must be positive, got {}",
            spec.rho_bar
        )));
    }
    let [l0, l1] = grid.lengths();
    let rb = spec.rho_bar;
    Ok(match spec.kind {
        InitialDataKind::SmoothPerturbation => {
            if !(spec.amplitude.abs() < 1.0) {
                return Err(Error::InfeasibleInitialData(format!(
                    "relative amplitude {} would create negative density",
                    spec.amplitude
                )));
            }
            let phi = random_band_limited(grid, spec.max_mode, &mut rng).remove_mean();
            let scale = phi.lp_norm(f64::INFINITY);
            let phi = if scale > 0.0 {
                phi.scale(1.0 / scale)
            } else {
                phi
            };
            let rho = phi.map(|p| rb * (1.0 + spec.amplitude * p));
            let u = random_velocity(grid, spec, &mut rng).scale(spec.amplitude);
            (rho, u)
        }
        InitialDataKind::VacuumPatch => {
            let chi = disk_indicator(grid, spec.radius)?;
            let outside = mollify(&chi.map(|c| 1.0 - c), spec.mollification_width);
            let m = outside.mean();
            let rho = outside.scale(rb / m);
            (rho, random_velocity(grid, spec, &mut rng))
        }
        InitialDataKind::DiscontinuousDensity => {
            let [lo, hi] = spec.levels;
            if !(lo >= 0.0 && hi >= 0.0 && lo.max(hi) > 0.0) {
                return Err(Error::InfeasibleInitialData(format!(
                    "density levels {:?} must be nonnegative",
                    spec.levels
                )));
            }
            let chi = disk_indicator(grid, spec.radius)?;
            let rho = mollify(
                &chi.map(|c| c * lo + (1.0 - c) * hi),
                spec.mollification_width,
            );
            (rho, random_velocity(grid, spec, &mut rng))
        }
        InitialDataKind::AcousticMode => {
            if !(spec.amplitude.abs() < 1.0) {
                return Err(Error::InfeasibleInitialData(format!(
                    "relative amplitude {} would create negative density",
                    spec.amplitude
                )));
            }
            let (k0, k1) = (2.0 * PI / l0, 2.0 * PI / l1);
            let rho =
                ScalarField::from_fn(grid, |x, _| rb * (1.0 + spec.amplitude * (k0 * x).cos()));
            let b = spec.velocity_amplitude;
            let u = VectorField::from_fn(grid, |_, y| [b * (k1 * y).sin(), 0.0]);
            (rho, u)
        }
    })
}

fn random_velocity(
    grid: &Arc<TorusGrid>,
    spec: &InitialDataSpec,
    rng: &mut ChaCha8Rng,
) -> VectorField {
    let x = random_band_limited(grid, spec.max_mode, rng);
    let y = random_band_limited(grid, spec.max_mode, rng);
    let v = VectorField { x, y };
    let n = v.l2_norm();
    if n > 0.0 {
        v.scale(spec.velocity_amplitude / n)
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn grid() -> Arc<TorusGrid> {
        make_grid([2.0 * PI, 2.0 * PI], [32, 32]).unwrap()
    }

    #[test]
    fn zero_amplitude_is_rest() {
        let p = CnsParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let s = generate_initial_data(
            &InitialDataSpec::new(InitialDataKind::SmoothPerturbation),
            &grid(),
            &p,
        )
        .unwrap();
        assert!(s.rho.values().iter().all(|&r| r == 1.0));
        assert!(s.velocity.max_magnitude() == 0.0 && s.momentum.max_magnitude() == 0.0);
    }

    #[test]
    fn constraints_hold_for_every_kind() {
        let p = CnsParams::with_nu(1.0, 100.0, 1.0, 1.0).unwrap();
        for kind in [
            InitialDataKind::SmoothPerturbation,
            InitialDataKind::VacuumPatch,
            InitialDataKind::DiscontinuousDensity,
            InitialDataKind::AcousticMode,
        ] {
            let mut spec = InitialDataSpec::new(kind);
            spec.amplitude = 0.3;
            spec.velocity_amplitude = 5.0;
            spec.seed = 7;
            let s = generate_initial_data(&spec, &grid(), &p).unwrap();
            let m = s.momentum.mean();
            assert!(m[0].abs() < 1e-13 && m[1].abs() < 1e-13, "{kind:?} {m:?}");
            assert!(
                div(&s.velocity).l2_norm() <= 0.1 * (1.0 + 1e-12),
                "{kind:?}"
            );
            assert!(s.rho.min() >= 0.0);
        }
    }

    #[test]
    fn vacuum_disk_has_zero_density_and_requested_mean() {
        let p = CnsParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let mut spec = InitialDataSpec::new(InitialDataKind::VacuumPatch);
        spec.radius = 2.5;
        let s = generate_initial_data(&spec, &grid(), &p).unwrap();
        assert_eq!(s.rho.min(), 0.0);
        assert!((s.rho.mean() - 1.0).abs() < 1e-14);
        let mut big = spec.clone();
        big.radius = 4.0;
        assert!(matches!(
            generate_initial_data(&big, &grid(), &p),
            Err(Error::InfeasibleInitialData(_))
        ));
    }

    #[test]
    fn mollifier_preserves_bounds_and_mean() {
        let g = grid();
        let chi = disk_indicator(&g, 1.2).unwrap().map(|c| 0.5 + 1.5 * c);
        let m = mollify(&chi, 2.0);
        assert!((m.mean() - chi.mean()).abs() < 1e-14);
        assert!(m.min() >= 0.5 && m.max() <= 2.0);
    }

    #[test]
    fn same_seed_same_data() {
        let p = CnsParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let mut spec = InitialDataSpec::new(InitialDataKind::SmoothPerturbation);
        spec.amplitude = 0.1;
        spec.seed = 3;
        let a = generate_initial_data(&spec, &grid(), &p).unwrap();
        let b = generate_initial_data(&spec, &grid(), &p).unwrap();
        assert_eq!(a.rho.values(), b.rho.values());
        assert_eq!(a.velocity.x.values(), b.velocity.x.values());
    }
}
