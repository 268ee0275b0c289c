//! Variable-mass viscous solve `(ρ − τL)u = r` with `L = μΔ + β∇div`.
//!
//! The conjugate gradient runs on Fourier coefficients, where `L` is diagonal
//! per mode; the density product is applied in physical space. The
//! preconditioner is the exact inverse of the constant-density operator
//! `ρ_ref − τL` with `ρ_ref = mean(ρ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::solver::{pcg, CgOptions, CgStats};
use crate::spectral::{ScalarField, Spectrum, TorusGrid, VectorField, VectorSpectrum};

/// Coefficients of `L = μΔ + β∇div`; `β = λ + μ` for the compressible system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscousOperator {
    pub mu: f64,
    pub beta: f64,
}

impl ViscousOperator {
    /// Symbol of `−L` at mode `(i, j)` applied to `(vx, vy)`.
    #[inline]
    fn neg_symbol(
        &self,
        g: &TorusGrid,
        i: usize,
        j: usize,
        vx: Complex64,
        vy: Complex64,
    ) -> (Complex64, Complex64) {
        let k2 = g.k_mag2(i, j);
        let kx = g.deriv_wavenumbers(0)[i];
        let ky = g.deriv_wavenumbers(1)[j];
        let kv = (vx * kx + vy * ky) * self.beta;
        (vx * (self.mu * k2) + kv * kx, vy * (self.mu * k2) + kv * ky)
    }

    /// `L u` evaluated spectrally.
    pub fn apply(&self, u: &VectorField) -> VectorField {
        let g = u.grid().clone();
        let s = u.to_spectral();
        let [n0, n1] = g.resolution();
        let mut ox = s.x.clone();
        let mut oy = s.y.clone();
        for j in 0..n1 {
            for i in 0..n0 {
                let idx = j * n0 + i;
                let (a, b) = self.neg_symbol(&g, i, j, s.x.coeffs()[idx], s.y.coeffs()[idx]);
                ox.coeffs_mut()[idx] = -a;
                oy.coeffs_mut()[idx] = -b;
            }
        }
        VectorSpectrum { x: ox, y: oy }.to_physical()
    }
}

fn pack(s: &VectorSpectrum) -> Vec<f64> {
    let mut v = Vec::with_capacity(4 * s.x.coeffs().len());
    for c in s.x.coeffs().iter().chain(s.y.coeffs()) {
        v.push(c.re);
        v.push(c.im);
    }
    v
}

fn unpack(v: &[f64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let c = |k: usize| Complex64::new(v[2 * k], v[2 * k + 1]);
    ((0..n).map(c).collect(), (n..2 * n).map(c).collect())
}

/// Solve `(ρ − τL)u = r`. The returned velocity satisfies `mean(ρu) = mean(r)` exactly.
pub fn solve_variable_mass(
    rho: &ScalarField,
    op: ViscousOperator,
    tau: f64,
    rhs: &VectorField,
    guess: Option<&VectorField>,
    opts: CgOptions,
) -> Result<(VectorField, CgStats)> {
    let g = rho.grid().clone();
    let n = g.len();
    let [n0, n1] = g.resolution();
    let rho_ref = rho.mean();
    if !(rho_ref > 0.0) {
        return Err(Error::InvalidParameter(
            "density must have positive mean".into(),
        ));
    }
    let rv = rho.values();
    let b = pack(&rhs.to_spectral());
    let mut x = match guess {
        Some(u) => pack(&u.to_spectral()),
        None => vec![0.0; 4 * n],
    };

    let apply = |v: &[f64], out: &mut [f64]| {
        let (cx, cy) = unpack(v, n);
        let (px, py) = g.inverse_pair(&cx, &cy);
        let mx: Vec<f64> = px.iter().zip(rv).map(|(a, r)| a * r).collect();
        let my: Vec<f64> = py.iter().zip(rv).map(|(a, r)| a * r).collect();
        let (fx, fy) = g.forward_pair(&mx, &my);
        for j in 0..n1 {
            for i in 0..n0 {
                let idx = j * n0 + i;
                let (a, b) = op.neg_symbol(&g, i, j, cx[idx], cy[idx]);
                let ox = fx[idx] + a * tau;
                let oy = fy[idx] + b * tau;
                out[2 * idx] = ox.re;
                out[2 * idx + 1] = ox.im;
                out[2 * (n + idx)] = oy.re;
                out[2 * (n + idx) + 1] = oy.im;
            }
        }
    };
    let precond = |r: &[f64], z: &mut [f64]| {
        for j in 0..n1 {
            for i in 0..n0 {
                let idx = j * n0 + i;
                let rx = Complex64::new(r[2 * idx], r[2 * idx + 1]);
                let ry = Complex64::new(r[2 * (n + idx)], r[2 * (n + idx) + 1]);
                let a = rho_ref + tau * op.mu * g.k_mag2(i, j);
                let kx = g.deriv_wavenumbers(0)[i];
                let ky = g.deriv_wavenumbers(1)[j];
                // Sherman-Morrison for (aI + τβ kkᵀ)⁻¹.
                let s = tau * op.beta / (a + tau * op.beta * (kx * kx + ky * ky));
                let kr = rx * kx + ry * ky;
                let zx = (rx - kr * (s * kx)) / a;
                let zy = (ry - kr * (s * ky)) / a;
                z[2 * idx] = zx.re;
                z[2 * idx + 1] = zx.im;
                z[2 * (n + idx)] = zy.re;
                z[2 * (n + idx) + 1] = zy.im;
            }
        }
    };
    let stats = pcg(apply, precond, &b, &mut x, opts)?;
    let (cx, cy) = unpack(&x, n);
    let mut u = VectorSpectrum {
        x: Spectrum::from_coeffs(&g, cx),
        y: Spectrum::from_coeffs(&g, cy),
    }
    .to_physical();
    let rm = rhs.mean();
    let mm = u.mul_scalar(rho).mean();
    u = u.add_constant([(rm[0] - mm[0]) / rho_ref, (rm[1] - mm[1]) / rho_ref]);
    Ok((u, stats))
}
