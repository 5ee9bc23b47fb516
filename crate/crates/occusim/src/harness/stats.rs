//! Streaming moment accumulators and the distribution test the Monte
//! Carlo experiments report with.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

/// Running per-coordinate mean and standard error of vector samples.
#[derive(Debug, Clone)]
pub struct VectorMoments {
    count: usize,
    sum: DVector<f64>,
    sum_sq: DVector<f64>,
}

impl VectorMoments {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, sum: DVector::zeros(dim), sum_sq: DVector::zeros(dim) }
    }

    pub fn push(&mut self, x: &DVector<f64>) {
        self.count += 1;
        self.sum += x;
        self.sum_sq.zip_apply(x, |s, v| *s += v * v);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> DVector<f64> {
        &self.sum / self.count as f64
    }

    /// Per-coordinate standard error of the mean. Needs two samples.
    pub fn standard_error(&self) -> DVector<f64> {
        let n = self.count as f64;
        assert!(self.count >= 2, "standard error needs at least two samples");
        let mean = self.mean();
        let mut out = self.sum_sq.clone();
        out.zip_apply(&mean, |s, m| {
            let var = (*s - n * m * m).max(0.0) / (n - 1.0);
            *s = (var / n).sqrt();
        });
        out
    }
}

/// Running per-entry mean and standard error of matrix samples.
#[derive(Debug, Clone)]
pub struct MatrixMoments {
    count: usize,
    sum: DMatrix<f64>,
    sum_sq: DMatrix<f64>,
}

impl MatrixMoments {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { count: 0, sum: DMatrix::zeros(nrows, ncols), sum_sq: DMatrix::zeros(nrows, ncols) }
    }

    pub fn push(&mut self, x: &DMatrix<f64>) {
        self.count += 1;
        self.sum += x;
        self.sum_sq.zip_apply(x, |s, v| *s += v * v);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> DMatrix<f64> {
        &self.sum / self.count as f64
    }

    pub fn standard_error(&self) -> DMatrix<f64> {
        let n = self.count as f64;
        assert!(self.count >= 2, "standard error needs at least two samples");
        let mean = self.mean();
        let mut out = self.sum_sq.clone();
        out.zip_apply(&mean, |s, m| {
            let var = (*s - n * m * m).max(0.0) / (n - 1.0);
            *s = (var / n).sqrt();
        });
        out
    }
}

/// Raw second moment `E[x x^T]` of vector samples, with per-entry
/// standard errors. For centered samples this estimates the covariance
/// without spending a degree of freedom on the mean.
#[derive(Debug, Clone)]
pub struct SecondMoment {
    inner: MatrixMoments,
}

impl SecondMoment {
    pub fn new(dim: usize) -> Self {
        Self { inner: MatrixMoments::new(dim, dim) }
    }

    pub fn push(&mut self, x: &DVector<f64>) {
        self.inner.push(&(x * x.transpose()));
    }

    pub fn count(&self) -> usize {
        self.inner.count()
    }

    pub fn moment(&self) -> DMatrix<f64> {
        self.inner.mean()
    }

    pub fn standard_error(&self) -> DMatrix<f64> {
        self.inner.standard_error()
    }
}

/// Linear-interpolation quantile of an already sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: usize,
}

/// One-sample Kolmogorov test against the standard normal, with the
/// asymptotic p-value at `sqrt(n) D`.
pub fn ks_normal_test(samples: &[f64]) -> KsResult {
    assert!(!samples.is_empty(), "test needs samples");
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsResult { statistic: d, p_value: kolmogorov_survival(n.sqrt() * d), sample_size: xs.len() }
}

/// Survival function of the Kolmogorov distribution,
/// `P(sup_t |B(t)| > z)` for a Brownian bridge `B`. Three regimes: the
/// theta-function form converges fast for small `z`, the alternating
/// series for moderate `z`, and the tail is numerically zero past 6.8116.
pub fn kolmogorov_survival(z: f64) -> f64 {
    use std::f64::consts::PI;
    let u = z.abs();
    if u < 0.2 {
        1.0
    } else if u < 0.755 {
        let v = 1.0 / (u * u);
        let c = PI * PI / 8.0;
        let series = (-c * v).exp() + (-9.0 * c * v).exp() + (-25.0 * c * v).exp();
        1.0 - (2.0 * PI).sqrt() / u * series
    } else if u < 6.8116 {
        let v = u * u;
        let mut sum = 0.0;
        for k in 1..=4_i32 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * (-2.0 * f64::from(k * k) * v).exp();
        }
        2.0 * sum
    } else {
        0.0
    }
}
