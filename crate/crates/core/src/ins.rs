//! Inhomogeneous incompressible Navier-Stokes on the torus.
//!
//! One step of size `dt`:
//!
//! 1. density: three-stage SSP Runge-Kutta of the positivity-limited transport
//!    with the old velocity;
//! 2. predictor: `(ρⁿ⁺¹ − dt/2·μΔ)u* = ρⁿuⁿ − dt·div(ρⁿuⁿ⊗uⁿ) + dt/2·μΔuⁿ − dt∇pⁿ`;
//! 3. projection: `−div(ρ_ε⁻¹∇φ) = −div(u*)/dt`, then `u = u* − dt·ρ_ε⁻¹∇φ`, `p ← p + φ`,
//!    with `ρ_ε = max(ρ, ε_den)`.
//!
//! The time discretisation is first order (Crank-Nicolson on the viscous term only).

use num_complex::Complex64;

use crate::cns::{fct_advance, initial_fields, remove_mean_momentum, InitialDataSpec};
use crate::error::{Error, Result};
use crate::solver::{pcg, CgOptions, CgStats};
use crate::spectral::{
    check_same, div, grad, leray_project, poincare_constant, ScalarField, Spectrum, TorusGrid,
    VectorField, VectorSpectrum,
};
use crate::viscous::{solve_variable_mass, ViscousOperator};

/// Relative floor `ε_den/ρ*₀` used in the projection coefficient.
pub const DENSITY_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct InsState {
    pub time: f64,
    pub rho: ScalarField,
    pub u: VectorField,
    /// Mean-zero pressure.
    pub p: ScalarField,
    pub mu: f64,
    pub eps_den: f64,
}

impl InsState {
    /// Builds a state at `t = 0`; `u` is replaced by its divergence-free part.
    pub fn new(rho: ScalarField, u: VectorField, mu: f64) -> Result<Self> {
        check_same(rho.grid(), u.grid())?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {mu}"
            )));
        }
        if let Some((index, &value)) = rho.values().iter().enumerate().find(|(_, v)| !(**v >= 0.0))
        {
            return Err(Error::NegativeDensity { index, value });
        }
        let rho_max = rho.max();
        if !(rho_max > 0.0) {
            return Err(Error::InvalidParameter(
                "density vanishes identically".into(),
            ));
        }
        let (u, _) = leray_project(&u);
        let p = ScalarField::zeros(rho.grid());
        Ok(InsState {
            time: 0.0,
            rho,
            u,
            p,
            mu,
            eps_den: DENSITY_FLOOR * rho_max,
        })
    }

    pub fn grid(&self) -> &std::sync::Arc<TorusGrid> {
        self.rho.grid()
    }

    pub fn mass(&self) -> f64 {
        self.rho.mean()
    }

    pub fn momentum(&self) -> [f64; 2] {
        self.u.mul_scalar(&self.rho).mean()
    }

    /// True when the density floor is active somewhere.
    pub fn is_regularized(&self) -> bool {
        self.rho.min() < self.eps_den
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite() && self.p.is_finite()
    }
}

/// Density from `spec` with a divergence-free velocity of zero mean momentum.
/// The divergence budget of `spec` plays no role here.
pub fn ins_initial_data(
    spec: &InitialDataSpec,
    grid: &std::sync::Arc<TorusGrid>,
    mu: f64,
) -> Result<InsState> {
    let (rho, u) = initial_fields(spec, grid)?;
    let mut state = InsState::new(rho, u, mu)?;
    state.u = remove_mean_momentum(&state.rho, &state.u)?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsStepOptions {
    pub cfl: f64,
    pub viscous_cg: CgOptions,
    pub projection_cg: CgOptions,
}

impl Default for InsStepOptions {
    fn default() -> Self {
        InsStepOptions {
            cfl: 0.4,
            viscous_cg: CgOptions {
                rel_tol: 1e-12,
                max_iter: 2000,
            },
            projection_cg: CgOptions {
                rel_tol: 1e-10,
                max_iter: 5000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InsStepStats {
    pub viscous_iterations: usize,
    pub projection_iterations: usize,
    pub projection_residual: f64,
    /// `‖div u‖₂` after the correction.
    pub divergence: f64,
}

/// `min(cfl·h/max|u|, μ/(ρ*·max|u|²))`; infinite for a fluid at rest.
pub fn ins_stable_dt(state: &InsState, cfl: f64) -> f64 {
    let v = state.u.max_magnitude();
    if v == 0.0 {
        return f64::INFINITY;
    }
    let h = state.grid().min_spacing();
    (cfl * h / v).min(state.mu / (state.rho.max() * v * v))
}

/// `∫ρ|u|²` with the normalized measure.
pub fn kinetic_energy(state: &InsState) -> f64 {
    let r = state.rho.values();
    let (x, y) = (state.u.x.values(), state.u.y.values());
    crate::spectral::accurate_sum((0..r.len()).map(|k| r[k] * (x[k] * x[k] + y[k] * y[k])))
        / r.len() as f64
}

/// `β₁ = 2μ/(ρ*₀ c² ‖ρ₀‖²)` with the sharp Poincaré constant `c` of the grid's torus.
pub fn beta1(rho0: &ScalarField, mu: f64, grid: &TorusGrid) -> Result<f64> {
    let rho_star = rho0.max();
    if !(rho_star > 0.0) {
        return Err(Error::InvalidParameter(
            "density vanishes identically".into(),
        ));
    }
    let mean = rho0.mean();
    if (mean - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "initial density must have mean 1, got {mean}"
        )));
    }
    let c = poincare_constant(grid);
    let norm2 = rho0.dot(rho0);
    Ok(2.0 * mu / (rho_star * c * c * norm2))
}

/// Dealiased `div(ρu⊗u)`.
fn convective_flux_divergence(rho: &ScalarField, u: &VectorField) -> VectorField {
    let m = u.mul_scalar(rho);
    let a = VectorField {
        x: &m.x * &u.x,
        y: &m.y * &u.y,
    }
    .to_spectral();
    let b = (&m.x * &u.y).to_spectral();
    let fx = a.x.derivative(0).add(&b.derivative(1));
    let fy = b.derivative(0).add(&a.y.derivative(1));
    VectorSpectrum {
        x: fx.dealias(),
        y: fy.dealias(),
    }
    .to_physical()
}

fn pack(s: &Spectrum) -> Vec<f64> {
    s.coeffs().iter().flat_map(|c| [c.re, c.im]).collect()
}

fn unpack(v: &[f64]) -> Vec<Complex64> {
    v.chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

/// Solve `−div(c∇φ) = b` spectrally; returns `∇φ` and `φ`.
fn solve_projection(
    c: &ScalarField,
    rhs: &Spectrum,
    opts: CgOptions,
) -> Result<(VectorField, ScalarField, CgStats)> {
    let g = c.grid().clone();
    let [n0, n1] = g.resolution();
    let kx = g.deriv_wavenumbers(0).to_vec();
    let ky = g.deriv_wavenumbers(1).to_vec();
    let cv = c.values();
    let c_ref = c.mean();
    let i = Complex64::i();

    let gradient = |phi: &[Complex64]| {
        let mut gx = vec![Complex64::new(0.0, 0.0); phi.len()];
        let mut gy = gx.clone();
        for j in 0..n1 {
            for ii in 0..n0 {
                let idx = j * n0 + ii;
                gx[idx] = i * kx[ii] * phi[idx];
                gy[idx] = i * ky[j] * phi[idx];
            }
        }
        g.inverse_pair(&gx, &gy)
    };
    let apply = |v: &[f64], out: &mut [f64]| {
        let phi = unpack(v);
        let (px, py) = gradient(&phi);
        let fx: Vec<f64> = px.iter().zip(cv).map(|(a, w)| a * w).collect();
        let fy: Vec<f64> = py.iter().zip(cv).map(|(a, w)| a * w).collect();
        let (sx, sy) = g.forward_pair(&fx, &fy);
        for j in 0..n1 {
            for ii in 0..n0 {
                let idx = j * n0 + ii;
                let d = -i * (sx[idx] * kx[ii] + sy[idx] * ky[j]);
                out[2 * idx] = d.re;
                out[2 * idx + 1] = d.im;
            }
        }
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for j in 0..n1 {
            for ii in 0..n0 {
                let idx = j * n0 + ii;
                let k2 = kx[ii] * kx[ii] + ky[j] * ky[j];
                let s = if k2 > 0.0 { 1.0 / (c_ref * k2) } else { 0.0 };
                z[2 * idx] = r[2 * idx] * s;
                z[2 * idx + 1] = r[2 * idx + 1] * s;
            }
        }
    };
    let b = pack(rhs);
    let mut x = vec![0.0; b.len()];
    let stats = pcg(apply, precond, &b, &mut x, opts)?;
    let phi = unpack(&x);
    let (px, py) = gradient(&phi);
    let grad_phi = VectorField {
        x: ScalarField::from_values(&g, px)?,
        y: ScalarField::from_values(&g, py)?,
    };
    let phi = Spectrum::from_coeffs(&g, phi).to_physical();
    Ok((grad_phi, phi, stats))
}

pub fn ins_step(state: &InsState, dt: f64) -> Result<InsState> {
    ins_step_with(state, dt, &InsStepOptions::default()).map(|(s, _)| s)
}

pub fn ins_step_with(
    state: &InsState,
    dt: f64,
    opts: &InsStepOptions,
) -> Result<(InsState, InsStepStats)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let bound = ins_stable_dt(state, opts.cfl);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let (rho0, u0) = (&state.rho, &state.u);
    let time = state.time + dt;

    let rho1 = if u0.max_magnitude() == 0.0 {
        rho0.clone()
    } else {
        let transport = |r: &ScalarField| fct_advance(r, u0, dt, 0.0);
        let r1 = transport(rho0)?;
        let r2 = rho0.zip_map(&transport(&r1)?, |a, b| 0.75 * a + 0.25 * b);
        rho0.zip_map(&transport(&r2)?, |a, b| a / 3.0 + 2.0 * b / 3.0)
    };
    if !rho1.is_finite() {
        return Err(Error::NonFinite { field: "rho", time });
    }

    let op = ViscousOperator {
        mu: state.mu,
        beta: 0.0,
    };
    let m0 = u0.mul_scalar(rho0);
    let rhs = m0
        .sub(&convective_flux_divergence(rho0, u0).scale(dt))
        .add(&op.apply(u0).scale(0.5 * dt))
        .sub(&grad(&state.p).scale(dt));
    let (u_star, vs) = solve_variable_mass(&rho1, op, 0.5 * dt, &rhs, Some(u0), opts.viscous_cg)?;

    let eps = state.eps_den;
    let c = rho1.map(|r| 1.0 / r.max(eps));
    let s = u_star.to_spectral();
    let div_star = s.x.derivative(0).add(&s.y.derivative(1));
    let (grad_phi, phi, ps) = solve_projection(&c, &div_star.scale(-1.0 / dt), opts.projection_cg)?;
    let mut u1 = u_star.sub(&grad_phi.mul_scalar(&c).scale(dt));
    let target = m0.mean();
    let have = u1.mul_scalar(&rho1).mean();
    let rho_mean = rho1.mean();
    u1 = u1.add_constant([
        (target[0] - have[0]) / rho_mean,
        (target[1] - have[1]) / rho_mean,
    ]);
    let p1 = (&state.p + &phi).remove_mean();
    if !u1.is_finite() || !p1.is_finite() {
        return Err(Error::NonFinite {
            field: "velocity",
            time,
        });
    }
    let divergence = div(&u1).l2_norm();
    Ok((
        InsState {
            time,
            rho: rho1,
            u: u1,
            p: p1,
            mu: state.mu,
            eps_den: eps,
        },
        InsStepStats {
            viscous_iterations: vs.iterations,
            projection_iterations: ps.iterations,
            projection_residual: ps.residual,
            divergence,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, vector_grad_norm};
    use std::f64::consts::PI;

    fn box2pi(n: usize) -> std::sync::Arc<TorusGrid> {
        make_grid([2.0 * PI, 2.0 * PI], [n, n]).unwrap()
    }

    #[test]
    fn beta1_examples() {
        let g = box2pi(16);
        let one = ScalarField::constant(&g, 1.0);
        assert!((beta1(&one, 1.0, &g).unwrap() - 2.0).abs() < 1e-14);
        assert!((beta1(&one, 3.0, &g).unwrap() - 6.0).abs() < 1e-14);
        let half = ScalarField::from_fn(&g, |x, _| if x < PI { 2.0 } else { 0.0 });
        assert!((beta1(&half, 1.0, &g).unwrap() - 0.5).abs() < 1e-14);
        assert!(beta1(&ScalarField::zeros(&g), 1.0, &g).is_err());
        assert!(beta1(&ScalarField::constant(&g, 2.0), 1.0, &g).is_err());
    }

    #[test]
    fn initial_data_is_solenoidal_without_mean_momentum() {
        use crate::cns::InitialDataKind;
        let g = box2pi(32);
        for kind in [
            InitialDataKind::SmoothPerturbation,
            InitialDataKind::VacuumPatch,
            InitialDataKind::DiscontinuousDensity,
        ] {
            let mut spec = InitialDataSpec::new(kind);
            spec.amplitude = 0.5;
            spec.radius = 1.5;
            spec.seed = 11;
            let st = ins_initial_data(&spec, &g, 1.0).unwrap();
            let m = st.momentum();
            assert!(m[0].abs() < 1e-14 && m[1].abs() < 1e-14, "{kind:?} {m:?}");
            assert!(
                div(&st.u).l2_norm() < 1e-12 * vector_grad_norm(&st.u).max(1.0),
                "{kind:?}"
            );
            assert!(st.u.max_magnitude() > 0.0);
        }
    }

    #[test]
    fn kinetic_energy_examples() {
        let g = box2pi(16);
        let st =
            InsState::new(ScalarField::constant(&g, 1.0), VectorField::zeros(&g), 1.0).unwrap();
        assert_eq!(kinetic_energy(&st), 0.0);
        let st = InsState::new(
            ScalarField::constant(&g, 2.0),
            VectorField::constant(&g, [1.0, 0.0]),
            1.0,
        )
        .unwrap();
        assert!((kinetic_energy(&st) - 2.0).abs() < 1e-14);
        let u = VectorField::from_fn(&g, |_, y| [y.sin(), 0.0]);
        let st = InsState::new(ScalarField::constant(&g, 1.0), u, 1.0).unwrap();
        assert!((kinetic_energy(&st) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn heat_mode_decays_at_the_viscous_rate() {
        let g = box2pi(32);
        let mu = 0.7;
        let u = VectorField::from_fn(&g, |_, y| [y.cos(), 0.0]);
        let mut st = InsState::new(ScalarField::constant(&g, 1.0), u, mu).unwrap();
        let ke0 = kinetic_energy(&st);
        let dt = 0.02;
        for _ in 0..150 {
            st = ins_step(&st, dt).unwrap();
            let exact = ke0 * (-2.0 * mu * st.time).exp();
            assert!((kinetic_energy(&st) / exact - 1.0).abs() < 5e-3);
        }
        assert!((st.time - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rest_is_frozen() {
        let g = box2pi(16);
        let rho = ScalarField::from_fn(&g, |x, y| 1.0 + 0.5 * (x + y).sin());
        let st = InsState::new(rho.clone(), VectorField::zeros(&g), 1.0).unwrap();
        let next = ins_step(&st, 0.1).unwrap();
        assert_eq!(next.rho.values(), rho.values());
        assert_eq!(next.u.max_magnitude(), 0.0);
    }

    #[test]
    fn variable_density_run_conserves_and_stays_solenoidal() {
        let g = box2pi(32);
        let rho = ScalarField::from_fn(&g, |x, y| 1.0 + 0.5 * (x).sin() * (y).cos());
        let u = VectorField::from_fn(&g, |x, y| {
            [(y).sin() + 0.3 * (2.0 * y + x).cos(), (x).cos()]
        });
        let mut st = InsState::new(rho, u, 0.5).unwrap();
        let (m0, p0) = (st.mass(), st.momentum());
        let mut ke = kinetic_energy(&st);
        for _ in 0..40 {
            let dt = ins_stable_dt(&st, 0.4).min(0.05);
            let (next, stats) = ins_step_with(&st, dt, &InsStepOptions::default()).unwrap();
            st = next;
            assert!(stats.divergence <= 1e-10 * vector_grad_norm(&st.u));
            let k = kinetic_energy(&st);
            assert!(k <= ke * (1.0 + 1e-12));
            ke = k;
            assert!(st.rho.min() >= 0.0);
        }
        assert!((st.mass() - m0).abs() < 1e-13);
        let p = st.momentum();
        assert!((p[0] - p0[0]).abs() < 1e-8 * st.time && (p[1] - p0[1]).abs() < 1e-8 * st.time);
    }

    #[test]
    fn vacuum_patch_is_regularized_and_stable() {
        let g = box2pi(32);
        let rho = ScalarField::from_fn(&g, |x, y| {
            if (x - PI).hypot(y - PI) < 1.2 {
                0.0
            } else {
                1.0
            }
        });
        let u = VectorField::from_fn(&g, |x, y| [(y).sin(), 0.5 * (x).sin()]);
        let mut st = InsState::new(rho, u, 1.0).unwrap();
        assert!(st.is_regularized());
        for _ in 0..20 {
            let dt = ins_stable_dt(&st, 0.4).min(0.05);
            st = ins_step(&st, dt).unwrap();
            assert!(st.rho.min() >= 0.0);
        }
        assert!(st.is_finite());
    }
}
