//! Total variation toolkit for scalar piecewise-linear functions with
//! jumps, plus checkers for the variation inequalities the integral
//! converter relies on:
//!
//! * boundedness: `sup_{s<=t} |x(s)| <= |x(0)| + v_x(t)`
//! * Lipschitz composition: `v_{f o x}(t) <= c v_x(t)`
//! * products: `v_{xy}(t) <= B (v_x(t) + v_y(t))` with `B` the larger sup
//! * alternating jumps against a binary path: the running sum
//!   `sum y(s-) dx(s)` never exceeds `sup |y| + v_y(t)`
//!
//! Every function here is right continuous with left limits. Variation of
//! a piecewise-linear function is computed in closed form (slope times
//! segment length plus jump sizes), so the checkers certify inequalities
//! rather than sample them. The one exception is composition with an
//! arbitrary Lipschitz map, where the variation of `f o x` is approximated
//! on a fine grid; the grid sum is a lower bound of the true variation,
//! which is the safe direction for the inequality being checked.

use crate::path_sim::CtmcPath;
use thiserror::Error;

/// Grid resolution per segment when a composition has no closed form.
const COMPOSITION_GRID: usize = 2048;

/// Slack allowed when declaring an inequality satisfied.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BvError {
    #[error("query time {t} outside the domain [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("not a binary path: {0}")]
    NotBinaryPath(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

/// A scalar function on `[0, horizon]` that is affine between breakpoints
/// and may jump at them. On segment `k` the value is
/// `offsets[k] + slopes[k] * t` with `t` absolute, so a continuous
/// function simply has matching segment values at each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BvFunction {
    breakpoints: Vec<f64>,
    offsets: Vec<f64>,
    slopes: Vec<f64>,
}

impl BvFunction {
    pub fn from_segments(
        breakpoints: Vec<f64>,
        offsets: Vec<f64>,
        slopes: Vec<f64>,
    ) -> Result<Self, BvError> {
        if breakpoints.len() < 2 {
            return Err(BvError::InvalidFunction("need at least one segment".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(BvError::InvalidFunction(format!(
                "domain must start at 0, got {}",
                breakpoints[0]
            )));
        }
        if offsets.len() != breakpoints.len() - 1 || slopes.len() != offsets.len() {
            return Err(BvError::InvalidFunction("segment data lengths disagree".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(BvError::InvalidFunction(format!(
                    "breakpoints must increase strictly, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if breakpoints.iter().chain(&offsets).chain(&slopes).any(|x| !x.is_finite()) {
            return Err(BvError::InvalidFunction("all values must be finite".into()));
        }
        Ok(Self { breakpoints, offsets, slopes })
    }

    /// Continuous piecewise-linear interpolation through `(t, value)` pairs.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self, BvError> {
        if points.len() < 2 {
            return Err(BvError::InvalidFunction("need at least two points".into()));
        }
        let breakpoints: Vec<f64> = points.iter().map(|p| p.0).collect();
        let mut offsets = Vec::with_capacity(points.len() - 1);
        let mut slopes = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let (t0, v0) = w[0];
            let (t1, v1) = w[1];
            if !(t1 > t0) {
                return Err(BvError::InvalidFunction("points must have increasing times".into()));
            }
            let slope = (v1 - v0) / (t1 - t0);
            slopes.push(slope);
            offsets.push(v0 - slope * t0);
        }
        Self::from_segments(breakpoints, offsets, slopes)
    }

    pub fn constant(c: f64, horizon: f64) -> Result<Self, BvError> {
        Self::from_segments(vec![0.0, horizon], vec![c], vec![0.0])
    }

    /// Piecewise-constant function: `values[0]` before `jump_times[0]`,
    /// then `values[k]` on `[jump_times[k-1], jump_times[k])`.
    pub fn step_function(
        jump_times: &[f64],
        values: &[f64],
        horizon: f64,
    ) -> Result<Self, BvError> {
        if values.len() != jump_times.len() + 1 {
            return Err(BvError::InvalidFunction(
                "need exactly one more value than jump times".into(),
            ));
        }
        if jump_times.iter().any(|&t| t <= 0.0 || t >= horizon) {
            return Err(BvError::InvalidFunction(
                "jump times must lie strictly inside the domain".into(),
            ));
        }
        let mut breakpoints = Vec::with_capacity(jump_times.len() + 2);
        breakpoints.push(0.0);
        breakpoints.extend_from_slice(jump_times);
        breakpoints.push(horizon);
        Self::from_segments(breakpoints, values.to_vec(), vec![0.0; values.len()])
    }

    /// The 0/1 indicator of `state` along a chain path, with consecutive
    /// equal values merged so every stored jump is a real transition.
    pub fn binary_indicator(path: &CtmcPath, state: usize) -> Result<Self, BvError> {
        if state >= path.dim() {
            return Err(BvError::InvalidFunction(format!(
                "state {state} out of range for dimension {}",
                path.dim()
            )));
        }
        let ind = |s: usize| if s == state { 1.0 } else { 0.0 };
        let mut jump_times = Vec::new();
        let mut values = vec![ind(path.initial_state())];
        for (&t, &s) in path.jump_times().iter().zip(path.post_jump_states()) {
            let v = ind(s);
            if v != *values.last().unwrap() && t < path.horizon() {
                jump_times.push(t);
                values.push(v);
            }
        }
        Self::step_function(&jump_times, &values, path.horizon())
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
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
    pub fn value(&self, t: f64) -> f64 {
        let k = self.segment_index(t);
        self.offsets[k] + self.slopes[k] * t
    }

    /// Left limit at `t`; at the origin this is the value itself.
    pub fn left_value(&self, t: f64) -> f64 {
        let k = self.left_segment_index(t);
        self.offsets[k] + self.slopes[k] * t
    }

    /// Jump discontinuities `(time, size)` strictly inside the domain,
    /// zero-size ones skipped.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &b in &self.breakpoints[1..self.breakpoints.len() - 1] {
            let delta = self.value(b) - self.left_value(b);
            if delta != 0.0 {
                out.push((b, delta));
            }
        }
        out
    }

    fn check_time(&self, t: f64) -> Result<(), BvError> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(BvError::OutOfHorizon { t, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Total variation on `[0, t]`, in closed form.
    pub fn total_variation(&self, t: f64) -> Result<f64, BvError> {
        self.check_time(t)?;
        let mut v = 0.0;
        for k in 0..self.segment_count() {
            let lo = self.breakpoints[k];
            if lo >= t {
                break;
            }
            if k > 0 {
                v += (self.value(lo) - self.left_value(lo)).abs();
            }
            let hi = self.breakpoints[k + 1].min(t);
            v += self.slopes[k].abs() * (hi - lo);
        }
        // A jump exactly at t belongs to [0, t] by right continuity.
        let on_breakpoint = self.breakpoints[1..self.segment_count()].contains(&t);
        if on_breakpoint {
            v += (self.value(t) - self.left_value(t)).abs();
        }
        Ok(v)
    }

    /// `sup_{s <= t} |x(s)|`, exact because each segment is affine and the
    /// left limits at breakpoints are inspected too.
    pub fn sup_abs(&self, t: f64) -> Result<f64, BvError> {
        self.check_time(t)?;
        let mut sup = self.value(0.0).abs().max(self.value(t).abs()).max(self.left_value(t).abs());
        for &b in &self.breakpoints[1..self.breakpoints.len() - 1] {
            if b > t {
                break;
            }
            sup = sup.max(self.value(b).abs()).max(self.left_value(b).abs());
        }
        Ok(sup)
    }

    /// Split into nondecreasing `(rise, fall)` with
    /// `x(t) = x(0) + rise(t) - fall(t)` and
    /// `v_x(t) = rise(t) + fall(t)`. Both parts start at zero.
    pub fn jordan_decomposition(&self) -> (BvFunction, BvFunction) {
        let m = self.segment_count();
        let mut rise_off = Vec::with_capacity(m);
        let mut rise_slope = Vec::with_capacity(m);
        let mut fall_off = Vec::with_capacity(m);
        let mut fall_slope = Vec::with_capacity(m);
        let mut rise = 0.0;
        let mut fall = 0.0;
        for k in 0..m {
            let lo = self.breakpoints[k];
            let hi = self.breakpoints[k + 1];
            if k > 0 {
                let delta = self.value(lo) - self.left_value(lo);
                rise += delta.max(0.0);
                fall += (-delta).max(0.0);
            }
            let sp = self.slopes[k].max(0.0);
            let sn = (-self.slopes[k]).max(0.0);
            rise_off.push(rise - sp * lo);
            rise_slope.push(sp);
            fall_off.push(fall - sn * lo);
            fall_slope.push(sn);
            rise += sp * (hi - lo);
            fall += sn * (hi - lo);
        }
        let rise_fn =
            BvFunction::from_segments(self.breakpoints.clone(), rise_off, rise_slope).unwrap();
        let fall_fn =
            BvFunction::from_segments(self.breakpoints.clone(), fall_off, fall_slope).unwrap();
        (rise_fn, fall_fn)
    }
}

/// Outcome of a single inequality check.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, holds: lhs <= rhs + BOUND_SLACK }
    }

    /// `rhs - lhs`; negative means the inequality failed.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// `sup_{s<=t} |x(s)| <= |x(0)| + v_x(t)`.
pub fn boundedness_bound(x: &BvFunction, t: f64) -> Result<BoundCheck, BvError> {
    let lhs = x.sup_abs(t)?;
    let rhs = x.value(0.0).abs() + x.total_variation(t)?;
    Ok(BoundCheck::new(lhs, rhs))
}

/// `v_{f o x}(t) <= c v_x(t)` for `f` Lipschitz with constant `c`.
///
/// The left side sums grid increments inside each segment plus the exact
/// jump contributions, so it is a monotone lower approximation of the true
/// variation of the composition; it is exact whenever the composition is
/// monotone between consecutive grid points.
pub fn lipschitz_composition_bound(
    x: &BvFunction,
    f: impl Fn(f64) -> f64,
    c: f64,
    t: f64,
) -> Result<BoundCheck, BvError> {
    x.check_time(t)?;
    let mut lhs = 0.0;
    for k in 0..x.segment_count() {
        let lo = x.breakpoints[k];
        if lo >= t {
            break;
        }
        if k > 0 {
            lhs += (f(x.value(lo)) - f(x.left_value(lo))).abs();
        }
        let hi = x.breakpoints[k + 1].min(t);
        let step = (hi - lo) / COMPOSITION_GRID as f64;
        let mut prev = f(x.offsets[k] + x.slopes[k] * lo);
        for i in 1..=COMPOSITION_GRID {
            let s = lo + step * i as f64;
            let cur = f(x.offsets[k] + x.slopes[k] * s);
            lhs += (cur - prev).abs();
            prev = cur;
        }
    }
    if x.breakpoints[1..x.segment_count()].contains(&t) {
        lhs += (f(x.value(t)) - f(x.left_value(t))).abs();
    }
    let rhs = c * x.total_variation(t)?;
    Ok(BoundCheck::new(lhs, rhs))
}

/// `v_{xy}(t) <= B (v_x(t) + v_y(t))` with
/// `B = max(sup |x|, sup |y|)` over `[0, t]`.
///
/// The product variation is exact: on a common refinement the product is
/// quadratic per segment, so its variation splits at the parabola vertex.
pub fn product_variation_bound(
    x: &BvFunction,
    y: &BvFunction,
    t: f64,
) -> Result<BoundCheck, BvError> {
    x.check_time(t)?;
    y.check_time(t)?;
    let mut cuts: Vec<f64> = x.breakpoints.iter().chain(&y.breakpoints).copied().collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut lhs = 0.0;
    for w in cuts.windows(2) {
        let lo = w[0];
        if lo >= t {
            break;
        }
        let hi = w[1].min(t);
        if lo > 0.0 {
            lhs += (x.value(lo) * y.value(lo) - x.left_value(lo) * y.left_value(lo)).abs();
        }
        let kx = x.segment_index(lo);
        let ky = y.segment_index(lo);
        let (a1, b1) = (x.offsets[kx], x.slopes[kx]);
        let (a2, b2) = (y.offsets[ky], y.slopes[ky]);
        lhs += quadratic_variation(a1 * a2, a1 * b2 + a2 * b1, b1 * b2, lo, hi);
    }
    if cuts[1..cuts.len() - 1].contains(&t) {
        lhs += (x.value(t) * y.value(t) - x.left_value(t) * y.left_value(t)).abs();
    }
    let b = x.sup_abs(t)?.max(y.sup_abs(t)?);
    let rhs = b * (x.total_variation(t)? + y.total_variation(t)?);
    Ok(BoundCheck::new(lhs, rhs))
}

/// Variation of `c0 + c1 s + c2 s^2` on `[lo, hi]`, splitting at the
/// vertex when it falls inside.
fn quadratic_variation(c0: f64, c1: f64, c2: f64, lo: f64, hi: f64) -> f64 {
    let p = |s: f64| c0 + c1 * s + c2 * s * s;
    if c2 != 0.0 {
        let vertex = -c1 / (2.0 * c2);
        if lo < vertex && vertex < hi {
            return (p(vertex) - p(lo)).abs() + (p(hi) - p(vertex)).abs();
        }
    }
    (p(hi) - p(lo)).abs()
}

/// For a binary path `x` (piecewise constant with values in `{0, 1}`, so
/// its jumps alternate in sign) and any `y` of bounded variation,
///
/// ```text
/// sup_{s <= t} | sum_{u <= s} y(u-) (x(u) - x(u-)) | <= sup_{s<=t} |y(s)| + v_y(t)
/// ```
///
/// The alternation is what makes the sum collapse: grouping consecutive
/// jump pairs telescopes into increments of `y`.
pub fn alternating_jump_bound(
    y: &BvFunction,
    x: &BvFunction,
    t: f64,
) -> Result<BoundCheck, BvError> {
    y.check_time(t)?;
    x.check_time(t)?;
    if x.slopes.iter().any(|&s| s != 0.0) {
        return Err(BvError::NotBinaryPath("path must be piecewise constant".into()));
    }
    if x.offsets.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(BvError::NotBinaryPath("path values must be 0 or 1".into()));
    }
    let mut running = 0.0;
    let mut lhs = 0.0_f64;
    for (time, delta) in x.jumps() {
        if time > t {
            break;
        }
        running += y.left_value(time) * delta;
        lhs = lhs.max(running.abs());
    }
    let rhs = y.sup_abs(t)? + y.total_variation(t)?;
    Ok(BoundCheck::new(lhs, rhs))
}
