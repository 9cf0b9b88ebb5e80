//! Signal-adapted partitions from discrete curvature extrema.
//!
//! Knots are placed where the magnitude of the discrete curvature of the
//! sampled signal has a strict local maximum, then every gap between
//! consecutive knots is subdivided uniformly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{Partition, PartitionError};

/// Minimum number of samples the curvature stencil can work with.
pub const MIN_SAMPLES: usize = 6;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AdaptError {
    #[error("signal has {0} samples, at least {MIN_SAMPLES} are required")]
    SignalTooShort(usize),

    #[error("invalid sampling interval [{0}, {1}]")]
    BadInterval(f64, f64),

    #[error("signal contains a non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Samples `f(c + k*h)`, `k = 0..=n`, with `h = (d - c) / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    values: Vec<f64>,
    c: f64,
    d: f64,
}

impl SampledSignal {
    pub fn new(values: Vec<f64>, c: f64, d: f64) -> Result<Self, AdaptError> {
        if values.len() < MIN_SAMPLES {
            return Err(AdaptError::SignalTooShort(values.len()));
        }
        if !(c < d) || !c.is_finite() || !d.is_finite() {
            return Err(AdaptError::BadInterval(c, d));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AdaptError::NonFiniteSample(i));
        }
        Ok(SampledSignal { values, c, d })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.c, self.d)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.d - self.c) / (self.values.len() - 1) as f64
    }

    /// Abscissa of sample `k`; the last sample sits exactly on `d`.
    pub fn abscissa(&self, k: usize) -> f64 {
        if k + 1 == self.values.len() {
            self.d
        } else {
            self.c + k as f64 * self.step()
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.abscissa(k)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Which curvature expression is used for knot detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureVariant {
    /// `f'' / (1 - f'^2)^{3/2}`, as stated for the knot-placement rule.
    ///
    /// Where `|f'| >= 1` the denominator is evaluated as
    /// `sign(1 - f'^2) * |1 - f'^2|^{3/2}`; a zero denominator yields a
    /// non-finite value, which is counted and compared as 0.
    #[default]
    PaperMinus,
    /// The textbook curvature `f'' / (1 + f'^2)^{3/2}`.
    StandardPlus,
}

impl CurvatureVariant {
    fn eval(self, df: f64, ddf: f64) -> f64 {
        let q = match self {
            CurvatureVariant::PaperMinus => 1.0 - df * df,
            CurvatureVariant::StandardPlus => 1.0 + df * df,
        };
        ddf / (q.signum() * q.abs().powf(1.5))
    }
}

/// Curvature knots and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureKnots {
    /// Sorted interior abscissas.
    pub knots: Vec<f64>,
    /// How many curvature evaluations were non-finite and compared as 0.
    pub nonfinite: usize,
}

/// Discrete curvature at sample `i`: forward first difference and central
/// second difference. Requires `1 <= i <= n - 1`.
fn curvature_at(f: &[f64], h: f64, i: usize, variant: CurvatureVariant) -> f64 {
    let df = (f[i + 1] - f[i]) / h;
    let ddf = ((f[i + 1] + f[i - 1]) - 2.0 * f[i]) / (h * h);
    variant.eval(df, ddf)
}

/// `(x_i, |curvature_i|)` for every sample where the stencil is defined.
/// Non-finite magnitudes are reported as they are.
pub fn curvature_profile(sig: &SampledSignal, variant: CurvatureVariant) -> Vec<(f64, f64)> {
    let f = sig.values();
    let h = sig.step();
    (1..f.len() - 1)
        .map(|i| (sig.abscissa(i), curvature_at(f, h, i, variant).abs()))
        .collect()
}

/// Abscissas `c + (k+1)h`, `k = 2..=n-3`, at which the discrete curvature
/// magnitude has a strict local maximum over samples `k, k+1, k+2`.
pub fn curvature_knots(sig: &SampledSignal, variant: CurvatureVariant) -> CurvatureKnots {
    let f = sig.values();
    let n = f.len() - 1;
    let h = sig.step();
    let mut nonfinite = 0;
    let mut magnitude = |i: usize| {
        let v = curvature_at(f, h, i, variant);
        if v.is_finite() {
            v.abs()
        } else {
            nonfinite += 1;
            0.0
        }
    };
    let mut knots = Vec::new();
    // samples 2..=n-1 are needed; each is evaluated once and slid along
    let mut window = [magnitude(2), magnitude(3), 0.0];
    for k in 2..=n - 3 {
        window[2] = magnitude(k + 2);
        if window[0] < window[1] && window[1] > window[2] {
            knots.push(sig.abscissa(k + 1));
        }
        window.rotate_left(1);
    }
    knots.dedup();
    CurvatureKnots { knots, nonfinite }
}

/// Curvature knots plus the endpoints, with `level - 1` extra knots in every
/// gap.
pub fn adapt_partition(sig: &SampledSignal, level: usize, variant: CurvatureVariant) -> Result<Partition, AdaptError> {
    Ok(adapt_partition_with_report(sig, level, variant)?.0)
}

pub fn adapt_partition_with_report(
    sig: &SampledSignal,
    level: usize,
    variant: CurvatureVariant,
) -> Result<(Partition, CurvatureKnots), AdaptError> {
    let found = curvature_knots(sig, variant);
    let (c, d) = sig.interval();
    let mut points = Vec::with_capacity(found.knots.len() + 2);
    points.push(c);
    points.extend(found.knots.iter().copied().filter(|&x| x > c && x < d));
    points.push(d);
    let partition = Partition::new(points)?.subdivide(level)?;
    Ok((partition, found))
}
