//! Change of unknowns to the normalized problem with `μ = κ = 1` and unit mean density.
//!
//! With `P̄ = P(ρ̄)`, velocity unit `U = √(P̄/ρ̄)`, length unit `X = μ/√(ρ̄P̄)` and
//! time unit `T = μ/P̄`, the substitution `ρ = ρ̄ρ̃`, `u = Uũ`, `x = Xx̃`, `t = Tt̃`
//! turns the system into one with `μ̃ = 1`, `λ̃ = λ/μ`, `κ̃ = 1` on the box `L/X`.

use serde::{Deserialize, Serialize};

use super::{CnsParams, CnsState};
use crate::error::{Error, Result};
use crate::spectral::{make_grid, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleRecord {
    pub rho_bar: f64,
    /// Multiply a physical velocity by `1/velocity_scale` to get `ũ`.
    pub velocity_scale: f64,
    /// `x̃ = space_factor·x`.
    pub space_factor: f64,
    /// `t̃ = time_factor·t`.
    pub time_factor: f64,
    pub original: CnsParams,
}

pub fn rescale_to_normalized(state: &CnsState) -> Result<(CnsState, RescaleRecord)> {
    let rho_bar = state.rho.mean();
    if !(rho_bar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean density must be positive, got {rho_bar}"
        )));
    }
    let p = state.params;
    let pbar = p.pressure_at(rho_bar);
    if !(pbar > 0.0) {
        return Err(Error::InvalidParameter(
            "rescaling needs a positive pressure".into(),
        ));
    }
    let rec = RescaleRecord {
        rho_bar,
        velocity_scale: (pbar / rho_bar).sqrt(),
        space_factor: (rho_bar * pbar).sqrt() / p.mu(),
        time_factor: pbar / p.mu(),
        original: p,
    };
    let params = CnsParams::new(1.0, p.lambda() / p.mu(), 1.0, p.gamma())?;
    let out = map_state(
        state,
        &rec,
        params,
        rec.space_factor,
        1.0 / rho_bar,
        1.0 / rec.velocity_scale,
        rec.time_factor,
    )?;
    Ok((out, rec))
}

pub fn rescale_back(state: &CnsState, rec: &RescaleRecord) -> Result<CnsState> {
    map_state(
        state,
        rec,
        rec.original,
        1.0 / rec.space_factor,
        rec.rho_bar,
        rec.velocity_scale,
        1.0 / rec.time_factor,
    )
}

#[allow(clippy::too_many_arguments)]
fn map_state(
    state: &CnsState,
    _rec: &RescaleRecord,
    params: CnsParams,
    space: f64,
    rho_factor: f64,
    vel_factor: f64,
    time_factor: f64,
) -> Result<CnsState> {
    let g = state.grid();
    let [l0, l1] = g.lengths();
    let ng = make_grid([l0 * space, l1 * space], g.resolution())?;
    let rho = ScalarField::from_values(
        &ng,
        state.rho.values().iter().map(|r| r * rho_factor).collect(),
    )?;
    let conv = |f: &ScalarField, c: f64| {
        ScalarField::from_values(&ng, f.values().iter().map(|v| v * c).collect())
    };
    let velocity = VectorField {
        x: conv(&state.velocity.x, vel_factor)?,
        y: conv(&state.velocity.y, vel_factor)?,
    };
    let mf = rho_factor * vel_factor;
    let momentum = VectorField {
        x: conv(&state.momentum.x, mf)?,
        y: conv(&state.momentum.y, mf)?,
    };
    Ok(CnsState {
        time: state.time * time_factor,
        rho,
        momentum,
        velocity,
        params,
        eps_vac: state.eps_vac * rho_factor,
    })
}
