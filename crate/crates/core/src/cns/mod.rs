//! Barotropic compressible Navier-Stokes on the torus.
//!
//! The state carries density, momentum and the velocity obtained from the
//! last implicit viscous solve. Mass is moved by a flux-corrected finite-volume
//! update; momentum is advanced pseudo-spectrally with implicit viscosity.

mod initial;
mod rescale;
mod step;
pub(crate) mod transport;

pub use initial::{
    generate_initial_data, mollify, random_band_limited, InitialDataKind, InitialDataSpec,
};
pub(crate) use initial::{initial_fields, remove_mean_momentum};
pub use rescale::{rescale_back, rescale_to_normalized, RescaleRecord};
pub use step::{cns_step, cns_step_with, stable_dt, StepOptions, StepStats};
pub use transport::fct_advance;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{div, ScalarField, TorusGrid, VectorField, VectorSpectrum};
use crate::viscous::ViscousOperator;

/// Viscosities and pressure law `P(ρ) = κρ^γ`. The compressional viscosity
/// `ν = λ + 2μ` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CnsParams {
    mu: f64,
    lambda: f64,
    kappa: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    mu: f64,
    lambda: f64,
    kappa: f64,
    gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu: Option<f64>,
}

impl TryFrom<RawParams> for CnsParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        let p = CnsParams::new(r.mu, r.lambda, r.kappa, r.gamma)?;
        if let Some(nu) = r.nu {
            if (nu - p.nu()).abs() > 1e-12 * nu.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "nu = {nu} is inconsistent with lambda + 2 mu = {}",
                    p.nu()
                )));
            }
        }
        Ok(p)
    }
}

impl From<CnsParams> for RawParams {
    fn from(p: CnsParams) -> Self {
        RawParams {
            mu: p.mu,
            lambda: p.lambda,
            kappa: p.kappa,
            gamma: p.gamma,
            nu: Some(p.nu()),
        }
    }
}

impl CnsParams {
    pub fn new(mu: f64, lambda: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        Self::build(mu, lambda, kappa, gamma)
    }

    /// Parameters from `μ` and `ν` instead of `μ` and `λ`.
    pub fn with_nu(mu: f64, nu: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(mu, nu - 2.0 * mu, kappa, gamma)
    }

    /// `κ = 0` check mode: no pressure force.
    pub fn pressureless(mu: f64, lambda: f64) -> Result<Self> {
        Self::build(mu, lambda, 0.0, 1.0)
    }

    fn build(mu: f64, lambda: f64, kappa: f64, gamma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(lambda.is_finite() && lambda + 2.0 * mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu = lambda + 2 mu must be positive, got {}",
                lambda + 2.0 * mu
            )));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 1, got {gamma}"
            )));
        }
        Ok(CnsParams {
            mu,
            lambda,
            kappa,
            gamma,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn nu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    #[inline]
    pub fn pressure_at(&self, rho: f64) -> f64 {
        if self.gamma == 1.0 {
            self.kappa * rho
        } else {
            self.kappa * rho.powf(self.gamma)
        }
    }

    /// `P′(ρ) = κγρ^{γ−1}`.
    pub fn pressure_derivative_at(&self, rho: f64) -> f64 {
        self.kappa * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Sound speed `√P′(ρ)`.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.pressure_derivative_at(rho).sqrt()
    }

    /// Potential energy density relative to `ρ̄`.
    #[inline]
    pub fn potential_energy_at(&self, rho: f64, rho_bar: f64) -> f64 {
        let k = self.kappa;
        if rho == 0.0 {
            return k * rho_bar.powf(self.gamma);
        }
        let r = rho / rho_bar;
        if self.gamma == 1.0 {
            k * (rho * r.ln() - rho + rho_bar)
        } else {
            let g1 = self.gamma - 1.0;
            let b = rho_bar.powf(g1);
            k * rho * b * ((g1 * r.ln()).exp_m1() / g1) + k * (rho_bar.powf(self.gamma) - rho * b)
        }
    }

    pub fn viscous_operator(&self) -> ViscousOperator {
        ViscousOperator {
            mu: self.mu,
            beta: self.lambda + self.mu,
        }
    }
}

/// Pointwise `κρ^γ`; negative density is rejected.
pub fn pressure(rho: &ScalarField, params: &CnsParams) -> Result<ScalarField> {
    check_nonnegative(rho)?;
    Ok(rho.map(|r| params.pressure_at(r)))
}

/// Pointwise `κρ^γ` with negative densities clamped to zero.
pub fn pressure_unchecked(rho: &ScalarField, params: &CnsParams) -> ScalarField {
    rho.map(|r| params.pressure_at(r.max(0.0)))
}

fn check_nonnegative(rho: &ScalarField) -> Result<()> {
    if let Some((index, &value)) = rho.values().iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
        return Err(Error::NegativeDensity { index, value });
    }
    Ok(())
}

/// `e(ρ) = ρ∫_{ρ̄}^{ρ} (P(s) − P(ρ̄))/s² ds`, evaluated in closed form.
pub fn potential_energy_density(
    rho: &ScalarField,
    rho_bar: f64,
    params: &CnsParams,
) -> Result<ScalarField> {
    if !(rho_bar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho_bar must be positive, got {rho_bar}"
        )));
    }
    check_nonnegative(rho)?;
    Ok(rho.map(|r| params.potential_energy_at(r, rho_bar)))
}

/// Default vacuum regularization `1e-8·√ρ*`.
pub fn default_eps_vac(rho_max: f64) -> f64 {
    1e-8 * rho_max.max(0.0).sqrt()
}

/// `u = mρ/(ρ² + ε²)` pointwise.
pub fn velocity_from_momentum(rho: &ScalarField, m: &VectorField, eps_vac: f64) -> VectorField {
    let e2 = eps_vac * eps_vac;
    let w = rho.map(|r| {
        if r == 0.0 && e2 == 0.0 {
            0.0
        } else {
            r / (r * r + e2)
        }
    });
    m.mul_scalar(&w)
}

#[derive(Debug, Clone)]
pub struct CnsState {
    pub time: f64,
    pub rho: ScalarField,
    pub momentum: VectorField,
    /// Velocity from the most recent viscous solve (or the initial data).
    pub velocity: VectorField,
    pub params: CnsParams,
    pub eps_vac: f64,
}

impl CnsState {
    /// Build from density and velocity; momentum is `ρu`.
    pub fn from_velocity(
        rho: ScalarField,
        velocity: VectorField,
        params: CnsParams,
        time: f64,
    ) -> Result<Self> {
        crate::spectral::check_same(rho.grid(), velocity.grid())?;
        check_nonnegative(&rho)?;
        let momentum = velocity.mul_scalar(&rho);
        let eps_vac = default_eps_vac(rho.max());
        Ok(CnsState {
            time,
            rho,
            momentum,
            velocity,
            params,
            eps_vac,
        })
    }

    /// Build from density and momentum; velocity is recovered with the vacuum regularization.
    pub fn from_momentum(
        rho: ScalarField,
        momentum: VectorField,
        params: CnsParams,
        time: f64,
    ) -> Result<Self> {
        crate::spectral::check_same(rho.grid(), momentum.grid())?;
        check_nonnegative(&rho)?;
        let eps_vac = default_eps_vac(rho.max());
        let velocity = velocity_from_momentum(&rho, &momentum, eps_vac);
        Ok(CnsState {
            time,
            rho,
            momentum,
            velocity,
            params,
            eps_vac,
        })
    }

    pub fn rest(grid: &Arc<TorusGrid>, rho_bar: f64, params: CnsParams) -> Result<Self> {
        Self::from_velocity(
            ScalarField::constant(grid, rho_bar),
            VectorField::zeros(grid),
            params,
            0.0,
        )
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.rho.grid()
    }

    pub fn mass(&self) -> f64 {
        self.rho.mean()
    }

    pub fn total_momentum(&self) -> [f64; 2] {
        self.momentum.mean()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.momentum.is_finite() && self.velocity.is_finite()
    }
}

/// Effective viscous flux `G = ν div u − P`, its mean-free part and its mean.
#[derive(Debug, Clone)]
pub struct EffectiveFlux {
    pub g: ScalarField,
    pub g_tilde: ScalarField,
    pub g_bar: f64,
}

pub fn effective_flux(state: &CnsState) -> EffectiveFlux {
    let nu = state.params.nu();
    let p = pressure_unchecked(&state.rho, &state.params);
    let g = &div(&state.velocity).scale(nu) - &p;
    let g_bar = g.mean();
    let g_tilde = g.map(|v| v - g_bar);
    EffectiveFlux { g, g_tilde, g_bar }
}

/// Dealiased explicit momentum tendency `−div(ρu⊗u) − ∇P`.
pub(crate) fn explicit_momentum(
    rho: &ScalarField,
    u: &VectorField,
    params: &CnsParams,
) -> VectorField {
    let m = u.mul_scalar(rho);
    let xx = &m.x * &u.x;
    let xy = &m.x * &u.y;
    let yy = &m.y * &u.y;
    let p = pressure_unchecked(rho, params);
    let a = VectorField { x: xx, y: yy }.to_spectral();
    let b = VectorField { x: xy, y: p }.to_spectral();
    let (sxx, syy, sxy, sp) = (&a.x, &a.y, &b.x, &b.y);
    let fx = sxx
        .derivative(0)
        .add(&sxy.derivative(1))
        .add(&sp.derivative(0));
    let fy = sxy
        .derivative(0)
        .add(&syy.derivative(1))
        .add(&sp.derivative(1));
    VectorSpectrum {
        x: fx.scale(-1.0).dealias(),
        y: fy.scale(-1.0).dealias(),
    }
    .to_physical()
}

/// Semi-discrete tendencies `(∂ₜρ, ∂ₜm)` of the spatial scheme.
pub fn cns_rhs(state: &CnsState) -> Result<(ScalarField, VectorField)> {
    let u = &state.velocity;
    let flux = u.mul_scalar(&state.rho);
    let drho = div(&flux).scale(-1.0);
    let dm = explicit_momentum(&state.rho, u, &state.params)
        .add(&state.params.viscous_operator().apply(u));
    if !drho.is_finite() {
        return Err(Error::NonFinite {
            field: "drho_dt",
            time: state.time,
        });
    }
    if !dm.is_finite() {
        return Err(Error::NonFinite {
            field: "dm_dt",
            time: state.time,
        });
    }
    Ok((drho, dm))
}

/// `u̇ ≈ (u − u_prev)/dt + (u·∇)u`, first order in time.
pub fn convective_derivative(
    u_prev: &VectorField,
    u_curr: &VectorField,
    dt: f64,
) -> Result<VectorField> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    crate::spectral::check_same(u_prev.grid(), u_curr.grid())?;
    let adv = crate::spectral::advect(u_curr, u_curr);
    Ok(u_curr.sub(u_prev).scale(1.0 / dt).add(&adv))
}
