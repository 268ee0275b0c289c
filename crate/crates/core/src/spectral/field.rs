use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Real samples of a scalar function on a [`TorusGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<TorusGrid>,
    values: Vec<f64>,
}

/// Fourier coefficients of a real field, normalized so index 0 is the mean.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<TorusGrid>,
    coeffs: Vec<Complex64>,
}

/// A two-component vector field sharing one grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

#[derive(Debug, Clone)]
pub struct VectorSpectrum {
    pub x: Spectrum,
    pub y: Spectrum,
}

/// Compensated (Neumaier) summation.
pub fn accurate_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub(crate) fn check_same(a: &Arc<TorusGrid>, b: &Arc<TorusGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<TorusGrid>, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f(x, y)` at every grid point.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let [n0, n1] = grid.resolution();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n1 {
            for i in 0..n0 {
                let (x, y) = grid.coords(i, j);
                values.push(f(x, y));
            }
        }
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<TorusGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_spectral(&self) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.grid.forward(&self.values),
        }
    }

    /// Mean value in the normalized measure.
    pub fn mean(&self) -> f64 {
        accurate_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    pub fn remove_mean(&self) -> ScalarField {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// `L_p` norm in the normalized measure (`‖1‖_p = 1`). `p = ∞` gives the grid maximum of `|f|`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm needs p >= 1");
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let n = self.values.len() as f64;
        if p == 2.0 {
            return (accurate_sum(self.values.iter().map(|v| v * v)) / n).sqrt();
        }
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Normalized `L₂` inner product `∫ f g d̄x`.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        accurate_sum(self.values.iter().zip(&other.values).map(|(a, b)| a * b))
            / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.values.len(), other.values.len());
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(|v| v * s)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Cyclic shift by whole grid cells.
    pub fn shifted(&self, di: usize, dj: usize) -> ScalarField {
        let [n0, n1] = self.grid.resolution();
        let mut out = vec![0.0; self.values.len()];
        for j in 0..n1 {
            for i in 0..n0 {
                out[((j + dj) % n1) * n0 + (i + di) % n0] = self.values[j * n0 + i];
            }
        }
        ScalarField {
            grid: self.grid.clone(),
            values: out,
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, s: f64) -> ScalarField {
        self.scale(s)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Spectrum {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        Spectrum {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_coeffs(grid: &Arc<TorusGrid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Spectrum {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn to_physical(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.grid.inverse(&self.coeffs),
        }
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Apply a per-mode multiplier `f(i, j) -> factor`.
    pub fn map_modes(&self, f: impl Fn(usize, usize) -> Complex64) -> Spectrum {
        let [n0, n1] = self.grid.resolution();
        let mut coeffs = self.coeffs.clone();
        for j in 0..n1 {
            for i in 0..n0 {
                coeffs[j * n0 + i] *= f(i, j);
            }
        }
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Spectral first derivative along `axis` (Nyquist zeroed).
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let k = self.grid.deriv_wavenumbers(axis).to_vec();
        self.map_modes(|i, j| Complex64::new(0.0, if axis == 0 { k[i] } else { k[j] }))
    }

    pub fn laplacian(&self) -> Spectrum {
        let g = self.grid.clone();
        self.map_modes(|i, j| Complex64::new(-g.k_mag2(i, j), 0.0))
    }

    /// 2/3-rule truncation: zero every mode with `|mᵢ| > nᵢ/3` in either direction.
    pub fn dealias(&self) -> Spectrum {
        let g = self.grid.clone();
        let [n0, n1] = g.resolution();
        let (c0, c1) = ((n0 / 3) as i64, (n1 / 3) as i64);
        self.map_modes(|i, j| {
            if g.modes(0)[i].abs() > c0 || g.modes(1)[j].abs() > c1 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    pub fn scale(&self, s: f64) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Spectrum) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Spectrum) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest modulus of any coefficient sitting on a Nyquist row or column.
    pub fn nyquist_content(&self) -> f64 {
        let [n0, n1] = self.grid.resolution();
        let mut m: f64 = 0.0;
        for j in 0..n1 {
            for i in 0..n0 {
                if self.grid.is_nyquist(i, j) {
                    m = m.max(self.coeffs[j * n0 + i].norm());
                }
            }
        }
        m
    }
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        check_same(x.grid(), y.grid())?;
        Ok(VectorField { x, y })
    }

    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn constant(grid: &Arc<TorusGrid>, c: [f64; 2]) -> Self {
        VectorField {
            x: ScalarField::constant(grid, c[0]),
            y: ScalarField::constant(grid, c[1]),
        }
    }

    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        VectorField {
            x: ScalarField::from_fn(grid, |x, y| f(x, y)[0]),
            y: ScalarField::from_fn(grid, |x, y| f(x, y)[1]),
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.x.grid()
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        if axis == 0 {
            &self.x
        } else {
            &self.y
        }
    }

    pub fn to_spectral(&self) -> VectorSpectrum {
        let g = self.grid();
        let (a, b) = g.forward_pair(self.x.values(), self.y.values());
        VectorSpectrum {
            x: Spectrum::from_coeffs(g, a),
            y: Spectrum::from_coeffs(g, b),
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.x.mean(), self.y.mean()]
    }

    /// `‖v‖₂ = (∫|v|² d̄x)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.x.dot(&self.x) + self.y.dot(&self.y)).sqrt()
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    /// Grid maximum of `|v|`.
    pub fn max_magnitude(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m: f64, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn scale(&self, s: f64) -> VectorField {
        VectorField {
            x: self.x.scale(s),
            y: self.y.scale(s),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> VectorField {
        VectorField {
            x: &self.x * s,
            y: &self.y * s,
        }
    }

    pub fn add_constant(&self, c: [f64; 2]) -> VectorField {
        VectorField {
            x: self.x.map(|v| v + c[0]),
            y: self.y.map(|v| v + c[1]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Flatten as `[x..., y...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.x.values().to_vec();
        v.extend_from_slice(self.y.values());
        v
    }

    pub fn from_flat(grid: &Arc<TorusGrid>, flat: &[f64]) -> VectorField {
        let n = grid.len();
        VectorField {
            x: ScalarField {
                grid: grid.clone(),
                values: flat[..n].to_vec(),
            },
            y: ScalarField {
                grid: grid.clone(),
                values: flat[n..2 * n].to_vec(),
            },
        }
    }
}

impl VectorSpectrum {
    pub fn to_physical(&self) -> VectorField {
        let g = self.grid();
        let (a, b) = g.inverse_pair(self.x.coeffs(), self.y.coeffs());
        VectorField {
            x: ScalarField {
                grid: g.clone(),
                values: a,
            },
            y: ScalarField {
                grid: g.clone(),
                values: b,
            },
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.x.grid()
    }
}
