//! Energies, effective-flux splits, identity residuals and per-sample diagnostic rows.

use serde::{Deserialize, Serialize};

use crate::cns::{
    effective_flux, potential_energy_density, pressure_unchecked, velocity_from_momentum, CnsState,
};
use crate::error::{Error, Result};
use crate::ins::{kinetic_energy as ins_kinetic_energy, InsState};
use crate::spectral::{
    div, grad, inv_neg_laplacian_spectral, leray_project, leray_project_spectral, strip_nyquist,
    vector_grad_norm, ScalarField, VectorField, VectorSpectrum,
};

/// `∫ρ|u|²` evaluated as `∫|m|²ρ/(ρ² + ε²)`.
pub fn kinetic_energy(state: &CnsState) -> f64 {
    let u = velocity_from_momentum(&state.rho, &state.momentum, state.eps_vac);
    state.momentum.dot(&u)
}

/// `∫e(ρ)` against the mean density of the state.
pub fn potential_energy(state: &CnsState) -> f64 {
    let rho_bar = state.rho.mean();
    match potential_energy_density(&state.rho, rho_bar, &state.params) {
        Ok(e) => e.mean(),
        Err(_) => f64::NAN,
    }
}

/// `E = ∫(½ρ|u|² + e(ρ))`.
pub fn energy_total(state: &CnsState) -> f64 {
    0.5 * kinetic_energy(state) + potential_energy(state)
}

/// `D = ½∫ρ|u|² + (1/ν)∫e(ρ)`.
pub fn d_functional(state: &CnsState, nu: f64) -> f64 {
    0.5 * kinetic_energy(state) + potential_energy(state) / nu
}

/// `μ‖∇ℙu‖² + ν‖div u‖²`, the rate of energy loss.
pub fn dissipation(state: &CnsState) -> f64 {
    let u = &state.velocity;
    let (pu, _) = leray_project(u);
    let gp = vector_grad_norm(&pu);
    let d = div(u).l2_norm();
    state.params.mu() * gp * gp + state.params.nu() * d * d
}

#[derive(Debug, Clone)]
pub struct TildeFields {
    pub p_tilde: ScalarField,
    pub p_bar: f64,
    pub g_tilde: ScalarField,
    pub g_bar: f64,
}

/// Mean-free parts and means of the pressure and of `G = ν div u − P`.
pub fn tilde_fields(state: &CnsState) -> TildeFields {
    let p = pressure_unchecked(&state.rho, &state.params);
    let p_bar = p.mean();
    let p_tilde = p.map(|v| v - p_bar);
    let f = effective_flux(state);
    TildeFields {
        p_tilde,
        p_bar,
        g_tilde: f.g_tilde,
        g_bar: f.g_bar,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `‖ν div u − (G̃ + P̃)‖ / max(ν‖∇u‖, ‖G̃‖, ‖P̃‖)`.
    pub flux_identity: f64,
    /// `|μ²‖Δℙu‖² + ‖∇G‖² − ‖ρu̇‖²| / ‖ρu̇‖²` with `ρu̇ = μ(Δu − ∇div u) + ∇G`.
    pub elliptic_pythagoras: f64,
    /// `‖u − ℙu + (1/ν)∇(−Δ)⁻¹(G̃ + P̃)‖ / ‖u‖`.
    pub helmholtz_reconstruction: f64,
    /// `‖ρu̇_measured − ρu̇‖ / ‖ρu̇‖` when a measured `u̇` is supplied; report-only.
    pub momentum_consistency: Option<f64>,
}

fn relative(abs: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        abs / scale
    } else {
        abs
    }
}

/// Residuals of the algebraic identities satisfied by `u`, `P` and `G`.
///
/// The Nyquist modes of `u` are removed first: the derivative there is zeroed, so
/// they would otherwise appear as a spurious non-solenoidal, non-gradient part.
pub fn identity_residuals(state: &CnsState, u_dot: Option<&VectorField>) -> IdentityResiduals {
    let params = &state.params;
    let (mu, nu) = (params.mu(), params.nu());
    let u = VectorField {
        x: strip_nyquist(&state.velocity.x),
        y: strip_nyquist(&state.velocity.y),
    };
    let p = pressure_unchecked(&state.rho, params);
    let p_tilde = p.remove_mean();
    let div_u = div(&u);
    let g = &div_u.scale(nu) - &p;
    let g_tilde = g.remove_mean();

    let nu_div = div_u.scale(nu);
    let flux_abs = (&nu_div - &(&g_tilde + &p_tilde)).l2_norm();
    let flux_scale = (nu * vector_grad_norm(&u))
        .max(g_tilde.l2_norm())
        .max(p_tilde.l2_norm());

    let us = u.to_spectral();
    let (pus, _) = leray_project_spectral(&us);
    let lap_pu = VectorSpectrum {
        x: pus.x.laplacian().scale(mu),
        y: pus.y.laplacian().scale(mu),
    }
    .to_physical();
    let grad_g = grad(&g);
    let rho_udot = lap_pu.add(&grad_g);
    let a2 = lap_pu.dot(&lap_pu);
    let b2 = grad_g.dot(&grad_g);
    let c2 = rho_udot.dot(&rho_udot);
    let elliptic = relative((a2 + b2 - c2).abs(), c2.max(a2 + b2));

    let phi = inv_neg_laplacian_spectral(&(&g_tilde + &p_tilde).to_spectral()).scale(1.0 / nu);
    let qu = VectorSpectrum {
        x: phi.derivative(0).scale(-1.0),
        y: phi.derivative(1).scale(-1.0),
    };
    let recon = VectorSpectrum {
        x: pus.x.add(&qu.x),
        y: pus.y.add(&qu.y),
    }
    .to_physical();
    let helm = relative(u.sub(&recon).l2_norm(), u.l2_norm());

    let momentum_consistency = u_dot.map(|ud| {
        let measured = ud.mul_scalar(&state.rho);
        relative(measured.sub(&rho_udot).l2_norm(), rho_udot.l2_norm())
    });
    IdentityResiduals {
        flux_identity: relative(flux_abs, flux_scale),
        elliptic_pythagoras: elliptic,
        helmholtz_reconstruction: helm,
        momentum_consistency,
    }
}

/// Running `(min, max)` of the density over a sequence of snapshots.
pub fn density_bounds<'a>(fields: impl IntoIterator<Item = &'a ScalarField>) -> Result<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for f in fields {
        let (lo, hi) = (f.min(), f.max());
        out = Some(match out {
            None => (lo, hi),
            Some((a, b)) => (a.min(lo), b.max(hi)),
        });
    }
    out.ok_or(Error::TooFewSamples { needed: 1, got: 0 })
}

/// Energy, dissipation rate and time of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
}

impl EnergySample {
    pub fn of(state: &CnsState) -> Self {
        EnergySample {
            t: state.time,
            energy: energy_total(state),
            dissipation: dissipation(state),
        }
    }
}

/// `r(t) = E(t) + ∫₀ᵗ dissipation − E(0)` with the trapezoidal rule.
pub fn energy_balance_residual(samples: &[EnergySample]) -> Result<super::TimeSeries> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut out = super::TimeSeries::new("energy_balance_residual", "E(t) + ∫ dissipation - E(0)");
    let e0 = samples[0].energy;
    let mut acc = 0.0;
    out.push(samples[0].t, 0.0)?;
    for w in samples.windows(2) {
        acc += 0.5 * (w[1].t - w[0].t) * (w[0].dissipation + w[1].dissipation);
        out.push(w[1].t, w[1].energy + acc - e0)?;
    }
    Ok(out)
}

/// One CSV row of the diagnostic time series. Columns that do not exist for
/// the incompressible system are left empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "KE")]
    pub ke: f64,
    #[serde(rename = "PE")]
    pub pe: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "norm_grad_Pu_L2")]
    pub norm_grad_pu_l2: f64,
    #[serde(rename = "norm_div_u_L2")]
    pub norm_div_u_l2: f64,
    #[serde(rename = "norm_Gtilde_L2")]
    pub norm_gtilde_l2: Option<f64>,
    #[serde(rename = "norm_Ptilde_L2")]
    pub norm_ptilde_l2: f64,
    #[serde(rename = "norm_Gtilde_Linf")]
    pub norm_gtilde_linf: Option<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub mass: f64,
    pub mom_x: f64,
    pub mom_y: f64,
    pub res_flux_id: Option<f64>,
    pub res_elliptic: Option<f64>,
    pub res_helmholtz: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "t",
    "E",
    "KE",
    "PE",
    "D",
    "norm_grad_Pu_L2",
    "norm_div_u_L2",
    "norm_Gtilde_L2",
    "norm_Ptilde_L2",
    "norm_Gtilde_Linf",
    "rho_min",
    "rho_max",
    "mass",
    "mom_x",
    "mom_y",
    "res_flux_id",
    "res_elliptic",
    "res_helmholtz",
];

impl DiagnosticRow {
    pub fn cns(state: &CnsState) -> Self {
        let ke = kinetic_energy(state);
        let pe = potential_energy(state);
        let nu = state.params.nu();
        let tf = tilde_fields(state);
        let (pu, _) = leray_project(&state.velocity);
        let res = identity_residuals(state, None);
        let [mx, my] = state.momentum.mean();
        DiagnosticRow {
            t: state.time,
            e: 0.5 * ke + pe,
            ke,
            pe,
            d: 0.5 * ke + pe / nu,
            norm_grad_pu_l2: vector_grad_norm(&pu),
            norm_div_u_l2: div(&state.velocity).l2_norm(),
            norm_gtilde_l2: Some(tf.g_tilde.l2_norm()),
            norm_ptilde_l2: tf.p_tilde.l2_norm(),
            norm_gtilde_linf: Some(tf.g_tilde.lp_norm(f64::INFINITY)),
            rho_min: state.rho.min(),
            rho_max: state.rho.max(),
            mass: state.rho.mean(),
            mom_x: mx,
            mom_y: my,
            res_flux_id: Some(res.flux_identity),
            res_elliptic: Some(res.elliptic_pythagoras),
            res_helmholtz: Some(res.helmholtz_reconstruction),
        }
    }

    /// Incompressible row: `E = D = ½∫ρ|u|²`, `PE = 0`, and the pressure column holds `‖p‖₂`.
    pub fn ins(state: &InsState) -> Self {
        let ke = ins_kinetic_energy(state);
        let [mx, my] = state.momentum();
        DiagnosticRow {
            t: state.time,
            e: 0.5 * ke,
            ke,
            pe: 0.0,
            d: 0.5 * ke,
            norm_grad_pu_l2: vector_grad_norm(&state.u),
            norm_div_u_l2: div(&state.u).l2_norm(),
            norm_gtilde_l2: None,
            norm_ptilde_l2: state.p.l2_norm(),
            norm_gtilde_linf: None,
            rho_min: state.rho.min(),
            rho_max: state.rho.max(),
            mass: state.rho.mean(),
            mom_x: mx,
            mom_y: my,
            res_flux_id: None,
            res_elliptic: None,
            res_helmholtz: None,
        }
    }

    /// Value of a named CSV column.
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "t" => self.t,
            "E" => self.e,
            "KE" => self.ke,
            "PE" => self.pe,
            "D" => self.d,
            "norm_grad_Pu_L2" => self.norm_grad_pu_l2,
            "norm_div_u_L2" => self.norm_div_u_l2,
            "norm_Gtilde_L2" => self.norm_gtilde_l2?,
            "norm_Ptilde_L2" => self.norm_ptilde_l2,
            "norm_Gtilde_Linf" => self.norm_gtilde_linf?,
            "rho_min" => self.rho_min,
            "rho_max" => self.rho_max,
            "mass" => self.mass,
            "mom_x" => self.mom_x,
            "mom_y" => self.mom_y,
            "res_flux_id" => self.res_flux_id?,
            "res_elliptic" => self.res_elliptic?,
            "res_helmholtz" => self.res_helmholtz?,
            _ => return None,
        })
    }
}
