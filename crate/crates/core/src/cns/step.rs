//! IMEX time step for the compressible system.
//!
//! Explicit part: Heun (SSP-RK2) for transport and pressure.
//! Implicit part: the stiffly accurate, L-stable tableau
//!
//! ```text
//!  0 |  0    0    0
//!  1 | 2/3  1/3   0
//!  1 | 1/2  1/4  1/4
//! ```
//!
//! applied to `L = μΔ + (λ+μ)∇div` acting on the velocity. Each implicit stage
//! solves `(ρ − τL)u = r` for the stage velocity, so no division by the density
//! is ever needed. The pair is second order.

use super::transport::fct_advance;
use super::{explicit_momentum, CnsState};
use crate::error::{Error, Result};
use crate::solver::CgOptions;
use crate::spectral::VectorField;
use crate::viscous::solve_variable_mass;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    /// Courant number in `dt ≤ cfl·h/(max|u| + c)`.
    pub cfl: f64,
    pub cg: CgOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            cfl: 0.4,
            cg: CgOptions {
                rel_tol: 1e-12,
                max_iter: 2000,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub cg_iterations: usize,
    pub cg_residual: f64,
}

/// Advective-acoustic bound `cfl·h/(max|u| + √(κγ(ρ*)^{γ−1}))`; infinite at rest without pressure.
pub fn stable_dt(state: &CnsState, cfl: f64) -> f64 {
    let h = state.grid().min_spacing();
    let c = state.params.sound_speed(state.rho.max().max(0.0));
    let speed = state.velocity.max_magnitude() + c;
    if speed > 0.0 {
        cfl * h / speed
    } else {
        f64::INFINITY
    }
}

/// Biharmonic coefficient that keeps Heun stable on purely advective modes.
fn hyper_coefficient(u: &VectorField, dt: f64) -> f64 {
    let v = u.max_magnitude();
    0.125 * dt.powi(3) * v.powi(4)
}

pub fn cns_step(state: &CnsState, dt: f64) -> Result<CnsState> {
    cns_step_with(state, dt, &StepOptions::default()).map(|(s, _)| s)
}

pub fn cns_step_with(
    state: &CnsState,
    dt: f64,
    opts: &StepOptions,
) -> Result<(CnsState, StepStats)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let bound = stable_dt(state, opts.cfl);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let params = &state.params;
    let op = params.viscous_operator();
    let mut stats = StepStats::default();

    let rho0 = &state.rho;
    let u0 = &state.velocity;
    let m0 = &state.momentum;
    let e1 = explicit_momentum(rho0, u0, params);
    let lu0 = op.apply(u0);

    let rho2 = fct_advance(rho0, u0, dt, hyper_coefficient(u0, dt))?;
    let r2 = m0.add(&e1.scale(dt)).add(&lu0.scale(2.0 * dt / 3.0));
    let (u2, s2) = solve_variable_mass(&rho2, op, dt / 3.0, &r2, Some(u0), opts.cg)?;

    let e2 = explicit_momentum(&rho2, &u2, params);
    let lu2 = op.apply(&u2);
    let rho_star = fct_advance(&rho2, &u2, dt, hyper_coefficient(&u2, dt))?;
    let rho3 = rho0.zip_map(&rho_star, |a, b| 0.5 * a + 0.5 * b);
    let r3 = m0
        .add(&e1.add(&e2).scale(0.5 * dt))
        .add(&lu0.scale(0.5 * dt))
        .add(&lu2.scale(0.25 * dt));
    let (u3, s3) = solve_variable_mass(&rho3, op, 0.25 * dt, &r3, Some(&u2), opts.cg)?;
    let m3 = r3.add(&op.apply(&u3).scale(0.25 * dt));

    stats.cg_iterations = s2.iterations + s3.iterations;
    stats.cg_residual = s2.residual.max(s3.residual);
    let time = state.time + dt;
    if !rho3.is_finite() {
        return Err(Error::NonFinite { field: "rho", time });
    }
    if !m3.is_finite() || !u3.is_finite() {
        return Err(Error::NonFinite {
            field: "momentum",
            time,
        });
    }
    Ok((
        CnsState {
            time,
            rho: rho3,
            momentum: m3,
            velocity: u3,
            params: *params,
            eps_vac: state.eps_vac,
        },
        stats,
    ))
}
