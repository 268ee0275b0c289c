//! Time series, log-linear decay fits and time-weighted accumulators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples `(t, value)` of one diagnostic with strictly increasing, finite times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    /// Free-form description of the functional and the state fields it reads.
    pub metadata: String,
    samples: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, metadata: impl Into<String>) -> Self {
        TimeSeries {
            name: name.into(),
            metadata: metadata.into(),
            samples: Vec::new(),
        }
    }

    pub fn from_samples(
        name: impl Into<String>,
        samples: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<Self> {
        let mut s = TimeSeries::new(name, "");
        for (t, v) in samples {
            s.push(t, v)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, t: f64, value: f64) -> Result<()> {
        let idx = self.samples.len();
        if !t.is_finite() || self.samples.last().is_some_and(|&(last, _)| t <= last) {
            return Err(Error::NonMonotoneTime(idx));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite {
                field: "time series value",
                time: t,
            });
        }
        self.samples.push((t, value));
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    /// Samples with `lo ≤ t ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples
            .iter()
            .copied()
            .filter(move |&(t, _)| t >= lo && t <= hi)
    }

    /// Multiply every value by `c`.
    pub fn scaled(&self, c: f64) -> TimeSeries {
        TimeSeries {
            name: self.name.clone(),
            metadata: self.metadata.clone(),
            samples: self.samples.iter().map(|&(t, v)| (t, c * v)).collect(),
        }
    }
}

/// `value ≈ amplitude·e^{−alpha·t}` on `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Positive means decay.
    pub alpha: f64,
    pub amplitude: f64,
    /// Coefficient of determination of the log-linear fit, unclamped.
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Last two thirds of the sampled interval.
pub fn default_window(series: &TimeSeries) -> Option<(f64, f64)> {
    let first = series.samples.first()?.0;
    let last = series.samples.last()?.0;
    Some((first + (last - first) / 3.0, last))
}

/// Least squares on `(t, ln value)`. A window of `None` means [`default_window`].
///
/// When the log-values have no spread, `r_squared` is 1 if the fit is exact.
pub fn fit_decay(series: &TimeSeries, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let window = match window.or_else(|| default_window(series)) {
        Some(w) => w,
        None => {
            return Err(Error::TooFewSamples {
                needed: MIN_FIT_POINTS,
                got: 0,
            })
        }
    };
    let mut pts = Vec::new();
    for (index, (t, v)) in series.samples.iter().copied().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveSample { index, value: v });
        }
        pts.push((t, v.ln()));
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewSamples {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    // Offsetting by the first log-value keeps a constant series exactly flat.
    let y0 = pts[0].1;
    pts.iter_mut().for_each(|p| p.1 -= y0);
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let amplitude = (intercept + y0).exp();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(DecayFit {
        alpha: -slope,
        amplitude,
        r_squared,
        window,
        n_points: pts.len(),
    })
}

/// As [`fit_decay`], except that a window of exact zeros is reported as a
/// non-decaying fit with zero amplitude.
pub fn fit_decay_or_zero(series: &TimeSeries, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let w = match window.or_else(|| default_window(series)) {
        Some(w) => w,
        None => {
            return Err(Error::TooFewSamples {
                needed: MIN_FIT_POINTS,
                got: 0,
            })
        }
    };
    let pts: Vec<_> = series.window(w.0, w.1).collect();
    if pts.len() >= MIN_FIT_POINTS && pts.iter().all(|p| p.1 == 0.0) {
        return Ok(DecayFit {
            alpha: 0.0,
            amplitude: 0.0,
            r_squared: 1.0,
            window: w,
            n_points: pts.len(),
        });
    }
    fit_decay(series, Some(w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Sup,
    Integral,
}

/// `sup` or trapezoidal `∫` of `e^{βt}·t^σ·value(t)` over the samples (`0⁰ = 1`).
pub fn weighted_norm_accumulator(
    series: &TimeSeries,
    beta: f64,
    sigma: f64,
    reduction: Reduction,
) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(beta >= 0.0 && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weights need β, σ ≥ 0, got β = {beta}, σ = {sigma}"
        )));
    }
    let w: Vec<(f64, f64)> = series
        .samples
        .iter()
        .map(|&(t, v)| (t, (beta * t).exp() * t.powf(sigma) * v))
        .collect();
    Ok(match reduction {
        Reduction::Sup => w.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        Reduction::Integral => w
            .windows(2)
            .map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1))
            .sum(),
    })
}
