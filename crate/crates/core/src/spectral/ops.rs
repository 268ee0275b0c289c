use num_complex::Complex64;

use super::field::{ScalarField, Spectrum, VectorField, VectorSpectrum};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn grad(s: &ScalarField) -> VectorField {
    grad_spectral(&s.to_spectral()).to_physical()
}

pub fn grad_spectral(s: &Spectrum) -> VectorSpectrum {
    VectorSpectrum {
        x: s.derivative(0),
        y: s.derivative(1),
    }
}

pub fn div(v: &VectorField) -> ScalarField {
    div_spectral(&v.to_spectral()).to_physical()
}

pub fn div_spectral(v: &VectorSpectrum) -> Spectrum {
    v.x.derivative(0).add(&v.y.derivative(1))
}

pub fn laplacian(s: &ScalarField) -> ScalarField {
    s.to_spectral().laplacian().to_physical()
}

pub fn vector_laplacian(v: &VectorField) -> VectorField {
    VectorField {
        x: laplacian(&v.x),
        y: laplacian(&v.y),
    }
}

/// Scalar vorticity `∂ₓv² − ∂ᵧv¹`.
pub fn curl(v: &VectorField) -> ScalarField {
    v.y.to_spectral()
        .derivative(0)
        .sub(&v.x.to_spectral().derivative(1))
        .to_physical()
}

/// 2/3-rule truncation of a physical field.
pub fn dealias(s: &ScalarField) -> ScalarField {
    s.to_spectral().dealias().to_physical()
}

/// Zero every coefficient on a Nyquist row or column.
pub fn strip_nyquist(s: &ScalarField) -> ScalarField {
    let g = s.grid().clone();
    s.to_spectral()
        .map_modes(|i, j| {
            if g.is_nyquist(i, j) {
                ZERO
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .to_physical()
}

/// Per-mode Leray projection `P̂ = (I − k kᵀ/|k|²) v̂` on a spectrum pair.
/// Modes whose derivative wavenumber vanishes (including the mean) go entirely to `P`.
pub fn leray_project_spectral(v: &VectorSpectrum) -> (VectorSpectrum, VectorSpectrum) {
    let g = v.grid().clone();
    let [n0, n1] = g.resolution();
    let (kx, ky) = (g.deriv_wavenumbers(0), g.deriv_wavenumbers(1));
    let mut px = v.x.clone();
    let mut py = v.y.clone();
    let mut qx = Spectrum::zeros(&g);
    let mut qy = Spectrum::zeros(&g);
    for j in 0..n1 {
        for i in 0..n0 {
            let k2 = kx[i] * kx[i] + ky[j] * ky[j];
            if k2 == 0.0 {
                continue;
            }
            let idx = j * n0 + i;
            let vx = v.x.coeffs()[idx];
            let vy = v.y.coeffs()[idx];
            let kv = (vx * kx[i] + vy * ky[j]) / k2;
            let (ax, ay) = (kv * kx[i], kv * ky[j]);
            qx.coeffs_mut()[idx] = ax;
            qy.coeffs_mut()[idx] = ay;
            px.coeffs_mut()[idx] = vx - ax;
            py.coeffs_mut()[idx] = vy - ay;
        }
    }
    (
        VectorSpectrum { x: px, y: py },
        VectorSpectrum { x: qx, y: qy },
    )
}

/// Helmholtz split `v = ℙv + 𝒬v` with `div ℙv = 0` and `curl 𝒬v = 0`.
pub fn leray_project(v: &VectorField) -> (VectorField, VectorField) {
    let (p, q) = leray_project_spectral(&v.to_spectral());
    (p.to_physical(), q.to_physical())
}

/// Solve `−Δφ = s` for mean-zero `s`, returning the mean-zero solution.
pub fn inv_neg_laplacian(s: &ScalarField) -> Result<ScalarField> {
    let mean = s.mean();
    let norm = s.l2_norm();
    if mean.abs() > 1e-10 * norm.max(f64::MIN_POSITIVE) && mean != 0.0 {
        return Err(Error::NonZeroMean { mean, norm });
    }
    Ok(inv_neg_laplacian_spectral(&s.to_spectral()).to_physical())
}

/// Spectral `(−Δ)⁻¹` with the mean mode set to zero.
pub fn inv_neg_laplacian_spectral(s: &Spectrum) -> Spectrum {
    let g = s.grid().clone();
    s.map_modes(|i, j| {
        let k2 = g.k_mag2(i, j);
        if k2 == 0.0 {
            ZERO
        } else {
            Complex64::new(1.0 / k2, 0.0)
        }
    })
}

/// `‖∇f‖₂` computed spectrally (derivative wavenumbers).
pub fn grad_norm(s: &ScalarField) -> f64 {
    grad(s).l2_norm()
}

/// `‖∇v‖₂ = (‖∇v¹‖² + ‖∇v²‖²)^{1/2}`.
pub fn vector_grad_norm(v: &VectorField) -> f64 {
    let a = grad(&v.x).l2_norm();
    let b = grad(&v.y).l2_norm();
    a.hypot(b)
}

/// `(u·∇)v` in physical space, no dealiasing.
pub fn advect(u: &VectorField, v: &VectorField) -> VectorField {
    let gx = grad(&v.x);
    let gy = grad(&v.y);
    VectorField {
        x: &(&u.x * &gx.x) + &(&u.y * &gx.y),
        y: &(&u.x * &gy.x) + &(&u.y * &gy.y),
    }
}
