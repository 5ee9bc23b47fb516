//! Pathwise integrals of matrix-valued integrands against the occupation
//! functionals, and the closed-form covariance of their Gaussian limits.
//!
//! Integrands are piecewise affine in time, `H(s) = A_k + s B_k` on the
//! k-th segment, with rows selecting output coordinates and columns
//! matching chain states. Against a piecewise-constant path every
//! integral reduces to exact polynomial segment sums:
//!
//! * against the fluctuation `G`: a degree-1 polynomial per segment,
//! * against the indicator jumps: a finite sum of left limits,
//! * against the scaled martingale `n^{-alpha/2} Y`: jump sum minus a
//!   drift integral, mirroring `dY = dK - n^alpha Q^T K ds`,
//! * the limit covariance `int H1 Sigma H2^T ds`: a degree-2 polynomial
//!   per segment of the common refinement.

use crate::chain_algebra::GeneratorMatrix;
use crate::path_sim::{CtmcPath, ScalingParams};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegralError {
    #[error("dimension mismatch: {0}")]
    DomainMismatch(String),
    #[error("query time {t} outside the common horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("covariance matrix is not symmetric positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("invalid piecewise function: {0}")]
    InvalidPiecewise(String),
}

/// Matrix-valued function on `[0, horizon]`, affine on each segment
/// `[b_k, b_{k+1})`: `H(s) = offsets[k] + s * slopes[k]` with `s` absolute.
/// Right continuous; left limits exist everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    breakpoints: Vec<f64>,
    offsets: Vec<DMatrix<f64>>,
    slopes: Vec<DMatrix<f64>>,
}

impl PiecewiseFunction {
    pub fn new(
        breakpoints: Vec<f64>,
        offsets: Vec<DMatrix<f64>>,
        slopes: Vec<DMatrix<f64>>,
    ) -> Result<Self, IntegralError> {
        if breakpoints.len() < 2 {
            return Err(IntegralError::InvalidPiecewise("need at least one segment".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(IntegralError::InvalidPiecewise(format!(
                "domain must start at 0, got {}",
                breakpoints[0]
            )));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(IntegralError::InvalidPiecewise(format!(
                    "breakpoints must increase strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if offsets.len() != breakpoints.len() - 1 || slopes.len() != offsets.len() {
            return Err(IntegralError::InvalidPiecewise("segment data lengths disagree".into()));
        }
        let shape = offsets[0].shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(IntegralError::InvalidPiecewise("matrices must be nonempty".into()));
        }
        for m in offsets.iter().chain(&slopes) {
            if m.shape() != shape {
                return Err(IntegralError::InvalidPiecewise("segment shapes disagree".into()));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(IntegralError::InvalidPiecewise("all entries must be finite".into()));
            }
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(IntegralError::InvalidPiecewise("breakpoints must be finite".into()));
        }
        Ok(Self { breakpoints, offsets, slopes })
    }

    pub fn constant(value: DMatrix<f64>, horizon: f64) -> Result<Self, IntegralError> {
        let zero = DMatrix::zeros(value.nrows(), value.ncols());
        Self::new(vec![0.0, horizon], vec![value], vec![zero])
    }

    /// Single segment `H(s) = a + s b`.
    pub fn affine(a: DMatrix<f64>, b: DMatrix<f64>, horizon: f64) -> Result<Self, IntegralError> {
        Self::new(vec![0.0, horizon], vec![a], vec![b])
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nrows(&self) -> usize {
        self.offsets[0].nrows()
    }

    pub fn ncols(&self) -> usize {
        self.offsets[0].ncols()
    }

    fn segment_count(&self) -> usize {
        self.offsets.len()
    }

    fn segment_index(&self, t: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        idx.saturating_sub(1).min(self.segment_count() - 1)
    }

    fn left_segment_index(&self, t: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b < t);
        idx.saturating_sub(1).min(self.segment_count() - 1)
    }

    /// Value at `t`, with `t` clamped into the domain.
    pub fn value(&self, t: f64) -> DMatrix<f64> {
        let k = self.segment_index(t);
        &self.offsets[k] + &self.slopes[k] * t
    }

    /// Left limit at `t`; at the origin this is the value itself.
    pub fn left_value(&self, t: f64) -> DMatrix<f64> {
        let k = self.left_segment_index(t);
        &self.offsets[k] + &self.slopes[k] * t
    }

    /// Pointwise `H(s) m`, shrinking columns to `m`'s.
    pub fn right_multiply(&self, m: &DMatrix<f64>) -> Result<Self, IntegralError> {
        if m.nrows() != self.ncols() {
            return Err(IntegralError::DomainMismatch(format!(
                "cannot multiply {}x{} function by {}x{} matrix",
                self.nrows(),
                self.ncols(),
                m.nrows(),
                m.ncols()
            )));
        }
        Self::new(
            self.breakpoints.clone(),
            self.offsets.iter().map(|a| a * m).collect(),
            self.slopes.iter().map(|b| b * m).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            offsets: self.offsets.iter().map(|a| a * c).collect(),
            slopes: self.slopes.iter().map(|b| b * c).collect(),
        }
    }

    /// `c1 h1 + c2 h2` on the common refinement of their breakpoints.
    pub fn linear_combination(
        c1: f64,
        h1: &Self,
        c2: f64,
        h2: &Self,
    ) -> Result<Self, IntegralError> {
        if h1.nrows() != h2.nrows() || h1.ncols() != h2.ncols() {
            return Err(IntegralError::DomainMismatch("shapes disagree".into()));
        }
        if h1.horizon() != h2.horizon() {
            return Err(IntegralError::DomainMismatch("horizons disagree".into()));
        }
        let cuts = merge_cuts(&h1.breakpoints, &h2.breakpoints);
        let mut offsets = Vec::with_capacity(cuts.len() - 1);
        let mut slopes = Vec::with_capacity(cuts.len() - 1);
        for &lo in &cuts[..cuts.len() - 1] {
            let k1 = h1.segment_index(lo);
            let k2 = h2.segment_index(lo);
            offsets.push(&h1.offsets[k1] * c1 + &h2.offsets[k2] * c2);
            slopes.push(&h1.slopes[k1] * c1 + &h2.slopes[k2] * c2);
        }
        Self::new(cuts, offsets, slopes)
    }
}

fn merge_cuts(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = a.iter().chain(b).copied().collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    cuts
}

/// Exact power moments of `[u, v]`: `int_u^v s^p ds` for `p = 0, 1, 2`.
fn moments(u: f64, v: f64) -> (f64, f64, f64) {
    (v - u, (v * v - u * u) / 2.0, (v * v * v - u * u * u) / 3.0)
}

fn check_query(h: &PiecewiseFunction, path: &CtmcPath, t: f64) -> Result<(), IntegralError> {
    if h.ncols() != path.dim() {
        return Err(IntegralError::DomainMismatch(format!(
            "integrand has {} columns, path has {} states",
            h.ncols(),
            path.dim()
        )));
    }
    let horizon = h.horizon().min(path.horizon());
    if !(0.0..=horizon).contains(&t) {
        return Err(IntegralError::OutOfHorizon { t, horizon });
    }
    Ok(())
}

/// Common refinement of the integrand breakpoints and the path jumps on
/// `[0, t]`, as `(lo, hi, state, integrand segment)` intervals.
fn refined_intervals(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    t: f64,
) -> Vec<(f64, f64, usize, usize)> {
    let mut cuts: Vec<f64> = Vec::with_capacity(h.breakpoints.len() + path.jump_count() + 2);
    cuts.push(0.0);
    cuts.extend(h.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t));
    cuts.extend(path.jump_times().iter().copied().filter(|&s| s > 0.0 && s < t));
    cuts.push(t);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let state = path.state_at(w[0]).expect("refinement stays inside the horizon");
        out.push((w[0], w[1], state, h.segment_index(w[0])));
    }
    out
}

/// `int_0^t H(s) dG(s)` where `G(s) = n^{alpha/2} (L(s) - pi s)` is the
/// fluctuation process. `G` is absolutely continuous with derivative
/// `n^{alpha/2} (K(s) - pi)`, so the integral is a plain segment sum.
pub fn integrate_wrt_occupation(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    pi: &DVector<f64>,
    sc: ScalingParams,
    t: f64,
) -> Result<DVector<f64>, IntegralError> {
    check_query(h, path, t)?;
    if pi.len() != path.dim() {
        return Err(IntegralError::DomainMismatch(format!(
            "stationary vector has length {}, path has {} states",
            pi.len(),
            path.dim()
        )));
    }
    let mut acc = DVector::zeros(h.nrows());
    let mut cache: Vec<Option<(DVector<f64>, DVector<f64>)>> = vec![None; h.segment_count()];
    for (u, v, state, seg) in refined_intervals(h, path, t) {
        let (d1, d2, _) = moments(u, v);
        let (a_pi, b_pi) = cache[seg]
            .get_or_insert_with(|| (&h.offsets[seg] * pi, &h.slopes[seg] * pi));
        acc += (h.offsets[seg].column(state) - &*a_pi) * d1
            + (h.slopes[seg].column(state) - &*b_pi) * d2;
    }
    Ok(acc * sc.half_speed_factor())
}

/// Jump integral against one indicator coordinate:
/// `scale * sum_{s <= t} H(s-) e_j (K_j(s) - K_j(s-))`, adding the left
/// limit column when the path enters state `j` and subtracting it on exit.
pub fn integrate_wrt_indicator(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    state_j: usize,
    t: f64,
    scale: f64,
) -> Result<DVector<f64>, IntegralError> {
    check_query(h, path, t)?;
    if state_j >= path.dim() {
        return Err(IntegralError::DomainMismatch(format!(
            "state {state_j} out of range for dimension {}",
            path.dim()
        )));
    }
    let mut acc = DVector::zeros(h.nrows());
    for (k, &s) in path.jump_times().iter().enumerate() {
        if s > t {
            break;
        }
        let (from, to) = path.jump_transition(k);
        let sign = if to == state_j {
            1.0
        } else if from == state_j {
            -1.0
        } else {
            continue;
        };
        let hk = h.left_value(s);
        acc += hk.column(state_j) * sign;
    }
    Ok(acc * scale)
}

/// `n^{alpha/2} int_0^t H(s) Q^T K(s) ds`, the drift half of the
/// martingale integral below.
pub fn integrate_wrt_drift(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    q: &GeneratorMatrix,
    sc: ScalingParams,
    t: f64,
) -> Result<DVector<f64>, IntegralError> {
    check_query(h, path, t)?;
    if q.dim() != path.dim() {
        return Err(IntegralError::DomainMismatch(format!(
            "generator has {} states, path has {}",
            q.dim(),
            path.dim()
        )));
    }
    let qt = q.entries().transpose();
    let mut acc = DVector::zeros(h.nrows());
    let mut cache: Vec<Option<(DMatrix<f64>, DMatrix<f64>)>> = vec![None; h.segment_count()];
    for (u, v, state, seg) in refined_intervals(h, path, t) {
        let (d1, d2, _) = moments(u, v);
        let (aq, bq) =
            cache[seg].get_or_insert_with(|| (&h.offsets[seg] * &qt, &h.slopes[seg] * &qt));
        acc += aq.column(state) * d1 + bq.column(state) * d2;
    }
    Ok(acc * sc.half_speed_factor())
}

/// `int_0^t H(s-) d(n^{-alpha/2} Y)(s)` for the compensated indicator
/// `Y(t) = K(t) - K(0) - n^alpha Q^T L(t)`: the jump sum over all states,
/// scaled by `n^{-alpha/2}`, minus the drift integral.
pub fn integrate_wrt_dynkin(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    q: &GeneratorMatrix,
    sc: ScalingParams,
    t: f64,
) -> Result<DVector<f64>, IntegralError> {
    check_query(h, path, t)?;
    if q.dim() != path.dim() {
        return Err(IntegralError::DomainMismatch(format!(
            "generator has {} states, path has {}",
            q.dim(),
            path.dim()
        )));
    }
    let mut jump_sum = DVector::zeros(h.nrows());
    for (k, &s) in path.jump_times().iter().enumerate() {
        if s > t {
            break;
        }
        let (from, to) = path.jump_transition(k);
        let hk = h.left_value(s);
        jump_sum += hk.column(to) - hk.column(from);
    }
    let drift = integrate_wrt_drift(h, path, q, sc, t)?;
    Ok(jump_sum / sc.half_speed_factor() - drift)
}

fn check_covariance_input(
    h1: &PiecewiseFunction,
    h2: &PiecewiseFunction,
    sigma: &DMatrix<f64>,
) -> Result<(), IntegralError> {
    if h1.ncols() != sigma.nrows() || h2.ncols() != sigma.nrows() || !sigma.is_square() {
        return Err(IntegralError::DomainMismatch(format!(
            "integrands with {} and {} columns against {}x{} covariance",
            h1.ncols(),
            h2.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if h1.horizon() != h2.horizon() {
        return Err(IntegralError::DomainMismatch("horizons disagree".into()));
    }
    let scale = sigma.amax();
    if (sigma - sigma.transpose()).amax() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(IntegralError::DomainMismatch("covariance must be symmetric".into()));
    }
    let eigen = nalgebra::SymmetricEigen::new(sigma.clone()).eigenvalues;
    let max = eigen.iter().cloned().fold(0.0_f64, f64::max);
    let min = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * max.max(f64::MIN_POSITIVE) {
        return Err(IntegralError::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// `int_0^t H1(s) Sigma H2(s)^T ds`, the cross covariance of the limit
/// integrals. Exact: the integrand is quadratic on each segment of the
/// common refinement.
pub fn limit_cross_covariance(
    h1: &PiecewiseFunction,
    h2: &PiecewiseFunction,
    sigma: &DMatrix<f64>,
    t: f64,
) -> Result<DMatrix<f64>, IntegralError> {
    check_covariance_input(h1, h2, sigma)?;
    if !(0.0..=h1.horizon()).contains(&t) {
        return Err(IntegralError::OutOfHorizon { t, horizon: h1.horizon() });
    }
    let cuts = merge_cuts(&h1.breakpoints, &h2.breakpoints);
    let mut acc = DMatrix::zeros(h1.nrows(), h2.nrows());
    for w in cuts.windows(2) {
        let lo = w[0];
        if lo >= t {
            break;
        }
        let hi = w[1].min(t);
        let (d1, d2, d3) = moments(lo, hi);
        let k1 = h1.segment_index(lo);
        let k2 = h2.segment_index(lo);
        let a1s = &h1.offsets[k1] * sigma;
        let b1s = &h1.slopes[k1] * sigma;
        acc += &a1s * h2.offsets[k2].transpose() * d1
            + (&a1s * h2.slopes[k2].transpose() + &b1s * h2.offsets[k2].transpose()) * d2
            + &b1s * h2.slopes[k2].transpose() * d3;
    }
    Ok(acc)
}

/// `int_0^t H(s) Sigma H(s)^T ds`, symmetrized against rounding.
pub fn limit_integral_covariance(
    h: &PiecewiseFunction,
    sigma: &DMatrix<f64>,
    t: f64,
) -> Result<DMatrix<f64>, IntegralError> {
    let raw = limit_cross_covariance(h, h, sigma, t)?;
    Ok((&raw + raw.transpose()) * 0.5)
}

/// Entrywise total variation of the integrand over `[0, t]`, and the
/// factor `n^{-alpha/2}` that the convergence argument multiplies it by.
#[derive(Debug, Clone)]
pub struct VariationReport {
    pub per_entry: DMatrix<f64>,
    pub max_entry: f64,
    pub scale: f64,
}

impl VariationReport {
    pub fn scaled_max(&self) -> f64 {
        self.scale * self.max_entry
    }

    /// True when the scaled variation stays within `threshold`, which is
    /// the smallness condition the integral convergence needs.
    pub fn certifies(&self, threshold: f64) -> bool {
        self.scaled_max() <= threshold
    }
}

/// Closed-form entrywise variation of `H` on `[0, t]` times `n^{-alpha/2}`.
pub fn scaled_variation_condition(
    h: &PiecewiseFunction,
    sc: ScalingParams,
    t: f64,
) -> Result<VariationReport, IntegralError> {
    if !(0.0..=h.horizon()).contains(&t) {
        return Err(IntegralError::OutOfHorizon { t, horizon: h.horizon() });
    }
    let mut per_entry = DMatrix::zeros(h.nrows(), h.ncols());
    for k in 0..h.segment_count() {
        let lo = h.breakpoints[k];
        if lo >= t {
            break;
        }
        if k > 0 {
            let jump = (&h.offsets[k] - &h.offsets[k - 1]) + (&h.slopes[k] - &h.slopes[k - 1]) * lo;
            per_entry.zip_apply(&jump, |v, j| *v += j.abs());
        }
        let hi = h.breakpoints[k + 1].min(t);
        per_entry.zip_apply(&h.slopes[k], |v, s| *v += s.abs() * (hi - lo));
    }
    if h.breakpoints[1..h.segment_count()].contains(&t) {
        let jump = h.value(t) - h.left_value(t);
        per_entry.zip_apply(&jump, |v, j| *v += j.abs());
    }
    let max_entry = per_entry.amax();
    Ok(VariationReport { per_entry, max_entry, scale: 1.0 / sc.half_speed_factor() })
}

/// An integrand that depends on the path through its occupation times:
/// `H(s) = base + sum_j L_j(s) weights[j]`. Materializing against a path
/// yields an ordinary piecewise-affine function with breakpoints at the
/// jumps; the deterministic limit replaces `L_j(s)` by `pi_j s`.
#[derive(Debug, Clone)]
pub struct PathFunctionalIntegrand {
    pub base: DMatrix<f64>,
    pub weights: Vec<DMatrix<f64>>,
}

impl PathFunctionalIntegrand {
    fn check_shapes(&self, dim: usize) -> Result<(), IntegralError> {
        if self.weights.len() != dim {
            return Err(IntegralError::DomainMismatch(format!(
                "need one weight per state: got {}, expected {dim}",
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| w.shape() != self.base.shape()) {
            return Err(IntegralError::DomainMismatch(
                "weights must share the base shape".into(),
            ));
        }
        Ok(())
    }

    pub fn materialize(&self, path: &CtmcPath) -> Result<PiecewiseFunction, IntegralError> {
        self.check_shapes(path.dim())?;
        let mut breakpoints = Vec::with_capacity(path.jump_count() + 2);
        breakpoints.push(0.0);
        breakpoints
            .extend(path.jump_times().iter().copied().filter(|&s| s < path.horizon()));
        breakpoints.push(path.horizon());
        let mut offsets = Vec::with_capacity(breakpoints.len() - 1);
        let mut slopes = Vec::with_capacity(breakpoints.len() - 1);
        // weighted = sum_j L_j(segment start) * weights[j], updated as the
        // sweep moves along the path.
        let mut weighted = DMatrix::zeros(self.base.nrows(), self.base.ncols());
        for w in breakpoints.windows(2) {
            let (u, v) = (w[0], w[1]);
            let state = path.state_at(u).expect("breakpoints stay inside the horizon");
            offsets.push(&self.base + &weighted - &self.weights[state] * u);
            slopes.push(self.weights[state].clone());
            weighted += &self.weights[state] * (v - u);
        }
        PiecewiseFunction::new(breakpoints, offsets, slopes)
    }

    pub fn limit(&self, pi: &DVector<f64>, horizon: f64) -> Result<PiecewiseFunction, IntegralError> {
        self.check_shapes(pi.len())?;
        let mut slope = DMatrix::zeros(self.base.nrows(), self.base.ncols());
        for (j, w) in self.weights.iter().enumerate() {
            slope += w * pi[j];
        }
        PiecewiseFunction::affine(self.base.clone(), slope, horizon)
    }
}
