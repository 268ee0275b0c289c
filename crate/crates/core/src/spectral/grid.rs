use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points per direction.
pub const MIN_RESOLUTION: usize = 8;

/// Serializable description of a periodic box: side lengths and points per direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lengths: [f64; 2],
    pub resolution: [usize; 2],
}

/// Uniform collocation grid on the flat torus `[0,L₁) × [0,L₂)`.
///
/// Samples are stored row-major with `x` varying fastest: index `j * n₁ + i`
/// holds the value at `(i·L₁/n₁, j·L₂/n₂)`. All integrals use the normalized
/// measure, so the mean of a constant is the constant itself.
///
/// FFT plans are built once and shared immutably.
pub struct TorusGrid {
    lengths: [f64; 2],
    resolution: [usize; 2],
    /// Full angular wavenumbers per direction (Nyquist kept, sign negative).
    wavenumbers: [Vec<f64>; 2],
    /// Wavenumbers used by first-derivative operators (Nyquist zeroed).
    deriv_wavenumbers: [Vec<f64>; 2],
    /// Signed integer frequency per index.
    modes: [Vec<i64>; 2],
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("lengths", &self.lengths)
            .field("resolution", &self.resolution)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.lengths == other.lengths && self.resolution == other.resolution
    }
}

/// Build a grid. Resolutions must be even and at least [`MIN_RESOLUTION`].
pub fn make_grid(lengths: [f64; 2], resolution: [usize; 2]) -> Result<Arc<TorusGrid>> {
    TorusGrid::new(lengths, resolution).map(Arc::new)
}

impl TorusGrid {
    pub fn new(lengths: [f64; 2], resolution: [usize; 2]) -> Result<Self> {
        for d in 0..2 {
            let n = resolution[d];
            if n < MIN_RESOLUTION || !n.is_multiple_of(2) {
                return Err(Error::InvalidGrid(format!(
                    "resolution {n} in direction {d} must be even and >= {MIN_RESOLUTION}"
                )));
            }
            let l = lengths[d];
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "length {l} in direction {d} must be positive"
                )));
            }
        }

        let mut planner = FftPlanner::new();
        let mk = |d: usize| {
            let n = resolution[d];
            let scale = 2.0 * PI / lengths[d];
            let modes: Vec<i64> = (0..n)
                .map(|m| {
                    if m <= n / 2 {
                        m as i64
                    } else {
                        m as i64 - n as i64
                    }
                })
                .map(|m| if m == (n / 2) as i64 { -m } else { m })
                .collect();
            let full: Vec<f64> = modes.iter().map(|&m| m as f64 * scale).collect();
            let deriv: Vec<f64> = modes
                .iter()
                .map(|&m| {
                    if m.unsigned_abs() as usize == n / 2 {
                        0.0
                    } else {
                        m as f64 * scale
                    }
                })
                .collect();
            (modes, full, deriv)
        };
        let (m0, k0, d0) = mk(0);
        let (m1, k1, d1) = mk(1);
        let fwd = [
            planner.plan_fft_forward(resolution[0]),
            planner.plan_fft_forward(resolution[1]),
        ];
        let inv = [
            planner.plan_fft_inverse(resolution[0]),
            planner.plan_fft_inverse(resolution[1]),
        ];
        Ok(TorusGrid {
            lengths,
            resolution,
            wavenumbers: [k0, k1],
            deriv_wavenumbers: [d0, d1],
            modes: [m0, m1],
            fwd,
            inv,
        })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Arc<Self>> {
        make_grid(spec.lengths, spec.resolution)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lengths: self.lengths,
            resolution: self.resolution,
        }
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }

    pub fn resolution(&self) -> [usize; 2] {
        self.resolution
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid spacing per direction.
    pub fn spacing(&self) -> [f64; 2] {
        [
            self.lengths[0] / self.resolution[0] as f64,
            self.lengths[1] / self.resolution[1] as f64,
        ]
    }

    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        h[0].min(h[1])
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution[0] + i
    }

    /// Physical coordinates of grid point `(i, j)`.
    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (i as f64 * h[0], j as f64 * h[1])
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    pub fn deriv_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.deriv_wavenumbers[axis]
    }

    /// Signed integer frequencies along `axis`; the Nyquist index maps to `-n/2`.
    pub fn modes(&self, axis: usize) -> &[i64] {
        &self.modes[axis]
    }

    /// `|k|²` of spectral index `(i, j)` using full wavenumbers.
    #[inline]
    pub fn k_mag2(&self, i: usize, j: usize) -> f64 {
        let kx = self.wavenumbers[0][i];
        let ky = self.wavenumbers[1][j];
        kx * kx + ky * ky
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize, j: usize) -> bool {
        i == self.resolution[0] / 2 || j == self.resolution[1] / 2
    }

    /// Smallest nonzero eigenvalue of `-Δ` on the box.
    pub fn lambda1(&self) -> f64 {
        let l = self.lengths[0].max(self.lengths[1]);
        (2.0 * PI / l).powi(2)
    }

    /// Forward transform with `1/(n₁n₂)` normalization, so coefficient `(0,0)` is the mean.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.fwd);
        let scale = 1.0 / self.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform; returns the real part of the synthesis.
    pub(crate) fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, &self.inv);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Transform two real fields with one complex FFT of `a + i b`.
    pub(crate) fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.transform(&mut buf, &self.fwd);
        let scale = 0.5 / self.len() as f64;
        let [n0, n1] = self.resolution;
        let mut fa = vec![Complex64::new(0.0, 0.0); buf.len()];
        let mut fb = fa.clone();
        for j in 0..n1 {
            let jm = (n1 - j) % n1;
            for i in 0..n0 {
                let im = (n0 - i) % n0;
                let z = buf[j * n0 + i];
                let zc = buf[jm * n0 + im].conj();
                fa[j * n0 + i] = (z + zc) * scale;
                let d = (z - zc) * scale;
                fb[j * n0 + i] = Complex64::new(d.im, -d.re);
            }
        }
        (fa, fb)
    }

    /// Inverse of [`forward_pair`](Self::forward_pair); both spectra must be Hermitian.
    pub(crate) fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
            .collect();
        self.transform(&mut buf, &self.inv);
        buf.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 2]) {
        let [n0, n1] = self.resolution;
        plans[0].process(buf);
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        for j in 0..n1 {
            for i in 0..n0 {
                t[i * n1 + j] = buf[j * n0 + i];
            }
        }
        plans[1].process(&mut t);
        for j in 0..n1 {
            for i in 0..n0 {
                buf[j * n0 + i] = t[i * n1 + j];
            }
        }
    }
}

/// Sharp Poincaré constant `c_T = 1/√λ₁ = max(L₁, L₂)/(2π)` for mean-zero functions.
pub fn poincare_constant(grid: &TorusGrid) -> f64 {
    1.0 / grid.lambda1().sqrt()
}
