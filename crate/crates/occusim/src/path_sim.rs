//! Pathwise-exact simulation of a speed-scaled chain and closed-form
//! evaluation of its occupation functionals.
//!
//! The chain with generator `n^alpha Q` is simulated by its jump chain:
//! exponential holding times at the scaled exit rate, then a transition
//! drawn from the current row of `Q`. A path stores only its jumps.
//! Because the state indicator `K` is piecewise constant, every time
//! integral below collapses to a weighted sum over jump segments; there is
//! no quadrature anywhere in this module. With `L(t)` the vector of
//! occupation times,
//!
//! ```text
//! Y(t)   = K(t) - K(0) - n^alpha Q^T L(t)                      (martingale)
//! <Y>(t) = n^alpha (diag(Q^T L) - Q^T diag(L) - diag(L) Q)     (compensator)
//! G(t)   = n^{alpha/2} (L(t) - pi t)                           (fluctuation)
//! ```

use crate::chain_algebra::GeneratorMatrix;
use crate::streams::RandomStream;
use nalgebra::{DMatrix, DVector};
use std::path::Path;
use thiserror::Error;

/// Refuse to simulate when the expected jump count exceeds this.
pub const DEFAULT_JUMP_CAP: f64 = 1e8;

#[derive(Debug, Error)]
pub enum PathSimError {
    #[error("state {0} has zero exit rate; the chain cannot leave it")]
    ZeroExitRate(usize),
    #[error("query time {t} outside the simulated horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("expected jump count {expected:.3e} exceeds cap {cap:.3e}; refusing to simulate")]
    HorizonTooLarge { expected: f64, cap: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid initial condition: {0}")]
    InvalidInit(String),
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
}

/// The pair `(n, alpha)` defining the time speed-up `n^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    n: u64,
    alpha: f64,
}

impl ScalingParams {
    pub fn new(n: u64, alpha: f64) -> Result<Self, PathSimError> {
        if n == 0 {
            return Err(PathSimError::InvalidScaling("n must be at least 1".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(PathSimError::InvalidScaling(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { n, alpha })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `n^{alpha/2}`.
    pub fn half_speed_factor(&self) -> f64 {
        (self.n as f64).powf(0.5 * self.alpha)
    }

    /// `n^alpha`, computed as the exact square of [`Self::half_speed_factor`]
    /// so that pathwise identities mixing the two powers cancel exactly.
    pub fn speed_factor(&self) -> f64 {
        let h = self.half_speed_factor();
        h * h
    }
}

/// Initial condition of a simulated path.
#[derive(Debug, Clone)]
pub enum PathInit {
    /// Start in this state (0-based index).
    Fixed(usize),
    /// Draw the initial state from this probability vector.
    Distribution(DVector<f64>),
}

/// A realized chain path on `[0, horizon]`: the initial state plus sparse
/// jump storage. States are 0-based indices; the path is right continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct CtmcPath {
    dim: usize,
    initial_state: usize,
    jump_times: Vec<f64>,
    post_jump_states: Vec<usize>,
    horizon: f64,
}

impl CtmcPath {
    pub fn new(
        dim: usize,
        initial_state: usize,
        jump_times: Vec<f64>,
        post_jump_states: Vec<usize>,
        horizon: f64,
    ) -> Result<Self, PathSimError> {
        if dim == 0 {
            return Err(PathSimError::InvalidPath("dimension must be positive".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(PathSimError::InvalidPath(format!("horizon must be positive, got {horizon}")));
        }
        if initial_state >= dim {
            return Err(PathSimError::InvalidPath(format!(
                "initial state {initial_state} out of range for dimension {dim}"
            )));
        }
        if jump_times.len() != post_jump_states.len() {
            return Err(PathSimError::InvalidPath("jump times and states differ in length".into()));
        }
        let mut prev_time = 0.0;
        let mut prev_state = initial_state;
        for (k, (&t, &s)) in jump_times.iter().zip(&post_jump_states).enumerate() {
            if !(t > prev_time) {
                return Err(PathSimError::InvalidPath(format!(
                    "jump times must be strictly increasing and positive (index {k})"
                )));
            }
            if t > horizon {
                return Err(PathSimError::InvalidPath(format!(
                    "jump at {t} lies beyond the horizon {horizon}"
                )));
            }
            if s >= dim {
                return Err(PathSimError::InvalidPath(format!("state {s} out of range (index {k})")));
            }
            if s == prev_state {
                return Err(PathSimError::InvalidPath(format!(
                    "self-jump into state {s} at index {k}"
                )));
            }
            prev_time = t;
            prev_state = s;
        }
        Ok(Self { dim, initial_state, jump_times, post_jump_states, horizon })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn post_jump_states(&self) -> &[usize] {
        &self.post_jump_states
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    fn check_time(&self, t: f64) -> Result<(), PathSimError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(PathSimError::OutOfHorizon { t, horizon: self.horizon });
        }
        Ok(())
    }

    /// State occupied at time `t` (right continuous at jump times).
    pub fn state_at(&self, t: f64) -> Result<usize, PathSimError> {
        self.check_time(t)?;
        let idx = self.jump_times.partition_point(|&x| x <= t);
        Ok(if idx == 0 { self.initial_state } else { self.post_jump_states[idx - 1] })
    }

    /// State pair `(before, after)` of jump number `k`.
    pub fn jump_transition(&self, k: usize) -> (usize, usize) {
        let before = if k == 0 { self.initial_state } else { self.post_jump_states[k - 1] };
        (before, self.post_jump_states[k])
    }
}

/// Simulate under the default jump-count cap.
pub fn simulate_path(
    q: &GeneratorMatrix,
    sc: ScalingParams,
    horizon: f64,
    init: &PathInit,
    seed: u64,
) -> Result<CtmcPath, PathSimError> {
    simulate_path_with_cap(q, sc, horizon, init, seed, DEFAULT_JUMP_CAP)
}

/// Simulate the chain with generator `n^alpha Q` on `[0, horizon]`.
///
/// Identical arguments and seed reproduce the path bit for bit. Each jump
/// consumes exactly two uniforms (holding time, then transition), so the
/// draw sequence does not depend on how the path is later queried.
pub fn simulate_path_with_cap(
    q: &GeneratorMatrix,
    sc: ScalingParams,
    horizon: f64,
    init: &PathInit,
    seed: u64,
    cap: f64,
) -> Result<CtmcPath, PathSimError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(PathSimError::InvalidPath(format!("horizon must be positive, got {horizon}")));
    }
    let speed = sc.speed_factor();
    let expected = speed * q.max_exit_rate() * horizon;
    if expected > cap {
        return Err(PathSimError::HorizonTooLarge { expected, cap });
    }
    let d = q.dim();
    let mut stream = RandomStream::new(seed, 0);
    let initial_state = match init {
        PathInit::Fixed(s) => {
            if *s >= d {
                return Err(PathSimError::InvalidInit(format!(
                    "fixed state {s} out of range for dimension {d}"
                )));
            }
            *s
        }
        PathInit::Distribution(p) => sample_initial(p, d, &mut stream)?,
    };

    let mut jump_times = Vec::new();
    let mut post_jump_states = Vec::new();
    let mut state = initial_state;
    let mut t = 0.0;
    loop {
        let exit = q.exit_rate(state) * speed;
        if exit <= 0.0 {
            return Err(PathSimError::ZeroExitRate(state));
        }
        let dt = stream.exponential(exit);
        let trans = stream.uniform();
        t += dt;
        if t > horizon {
            break;
        }
        state = next_state(q, state, trans);
        jump_times.push(t);
        post_jump_states.push(state);
    }
    CtmcPath::new(d, initial_state, jump_times, post_jump_states, horizon)
}

fn sample_initial(p: &DVector<f64>, d: usize, stream: &mut RandomStream) -> Result<usize, PathSimError> {
    if p.len() != d {
        return Err(PathSimError::InvalidInit(format!(
            "distribution has length {}, expected {d}",
            p.len()
        )));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(PathSimError::InvalidInit("probabilities must be nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(PathSimError::InvalidInit(format!("probabilities sum to {total}")));
    }
    let target = stream.uniform() * total;
    let mut cum = 0.0;
    for i in 0..d {
        cum += p[i];
        if target < cum {
            return Ok(i);
        }
    }
    Ok(d - 1)
}

fn next_state(q: &GeneratorMatrix, from: usize, u: f64) -> usize {
    let d = q.dim();
    let target = u * q.exit_rate(from);
    let mut cum = 0.0;
    let mut last_positive = from;
    for j in 0..d {
        if j == from {
            continue;
        }
        let rate = q.entries()[(from, j)];
        if rate > 0.0 {
            cum += rate;
            last_positive = j;
            if target < cum {
                return j;
            }
        }
    }
    last_positive
}

/// Indicator vector `K(t)`.
pub fn state_indicator(path: &CtmcPath, t: f64) -> Result<DVector<f64>, PathSimError> {
    let state = path.state_at(t)?;
    let mut k = DVector::zeros(path.dim());
    k[state] = 1.0;
    Ok(k)
}

/// Occupation-time vector `L(t)`, an exact sum over jump segments.
pub fn occupation_measure(path: &CtmcPath, t: f64) -> Result<DVector<f64>, PathSimError> {
    path.check_time(t)?;
    let mut l = DVector::zeros(path.dim());
    let mut seg_start = 0.0;
    let mut state = path.initial_state;
    for (k, &tk) in path.jump_times.iter().enumerate() {
        if tk >= t {
            break;
        }
        l[state] += tk - seg_start;
        seg_start = tk;
        state = path.post_jump_states[k];
    }
    l[state] += t - seg_start;
    Ok(l)
}

/// Occupation measures at several query times in one sweep.
/// `times` must be nondecreasing and inside the horizon.
pub fn occupation_batch(path: &CtmcPath, times: &[f64]) -> Result<Vec<DVector<f64>>, PathSimError> {
    for w in times.windows(2) {
        if w[1] < w[0] {
            return Err(PathSimError::InvalidPath(format!(
                "query times must be nondecreasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if let (Some(&first), Some(&last)) = (times.first(), times.last()) {
        path.check_time(first)?;
        path.check_time(last)?;
    }
    let mut out = Vec::with_capacity(times.len());
    let mut l = DVector::zeros(path.dim());
    let mut seg_start = 0.0;
    let mut state = path.initial_state;
    let mut k = 0usize;
    for &t in times {
        while k < path.jump_times.len() && path.jump_times[k] < t {
            l[state] += path.jump_times[k] - seg_start;
            seg_start = path.jump_times[k];
            state = path.post_jump_states[k];
            k += 1;
        }
        let mut snapshot = l.clone();
        snapshot[state] += t - seg_start;
        out.push(snapshot);
    }
    Ok(out)
}

/// The compensated indicator `Y(t) = K(t) - K(0) - n^alpha Q^T L(t)`,
/// a zero-mean martingale for every initial condition.
pub fn dynkin_martingale(
    path: &CtmcPath,
    q: &GeneratorMatrix,
    sc: ScalingParams,
    t: f64,
) -> Result<DVector<f64>, PathSimError> {
    let l = occupation_measure(path, t)?;
    let k_t = state_indicator(path, t)?;
    let k_0 = state_indicator(path, 0.0)?;
    Ok(k_t - k_0 - (q.entries().transpose() * l) * sc.speed_factor())
}

/// Predictable quadratic variation `<Y>(t)`; also a closed form in `L(t)`.
///
/// Each visited state contributes a positive combination of rank-one
/// matrices, so the result is symmetric positive semidefinite and
/// annihilates the all-ones vector.
pub fn compensator(
    path: &CtmcPath,
    q: &GeneratorMatrix,
    sc: ScalingParams,
    t: f64,
) -> Result<DMatrix<f64>, PathSimError> {
    let l = occupation_measure(path, t)?;
    let qt = q.entries().transpose();
    let qt_l = &qt * &l;
    let diag_l = DMatrix::from_diagonal(&l);
    let m = DMatrix::from_diagonal(&qt_l) - &qt * &diag_l - &diag_l * q.entries();
    Ok(m * sc.speed_factor())
}

/// Centered occupation fluctuation `G(t) = n^{alpha/2} (L(t) - pi t)`.
pub fn fluctuation_process(
    path: &CtmcPath,
    pi: &DVector<f64>,
    sc: ScalingParams,
    t: f64,
) -> Result<DVector<f64>, PathSimError> {
    let l = occupation_measure(path, t)?;
    Ok((l - pi * t) * sc.half_speed_factor())
}

/// `sup_{t <= horizon} || L(t) - pi t ||_2`, evaluated exactly.
///
/// The centered occupation path is affine between jumps and any norm is
/// convex, so the supremum over each segment is attained at an endpoint;
/// scanning the breakpoints is exact, not a discretization.
pub fn sup_centered_occupation(path: &CtmcPath, pi: &DVector<f64>) -> f64 {
    let d = path.dim();
    let norm_at = |l: &[f64], t: f64| -> f64 {
        (0..d).map(|i| (l[i] - pi[i] * t).powi(2)).sum::<f64>().sqrt()
    };
    let mut l = vec![0.0; d];
    let mut best = 0.0_f64;
    let mut seg_start = 0.0;
    let mut state = path.initial_state;
    for (k, &tk) in path.jump_times.iter().enumerate() {
        l[state] += tk - seg_start;
        best = best.max(norm_at(&l, tk));
        seg_start = tk;
        state = path.post_jump_states[k];
    }
    l[state] += path.horizon - seg_start;
    best.max(norm_at(&l, path.horizon))
}

/// All functionals of one path bundled behind a query-time API.
pub struct PathFunctionals<'a> {
    pub path: &'a CtmcPath,
    pub q: &'a GeneratorMatrix,
    pub pi: &'a DVector<f64>,
    pub sc: ScalingParams,
}

impl PathFunctionals<'_> {
    pub fn indicator(&self, t: f64) -> Result<DVector<f64>, PathSimError> {
        state_indicator(self.path, t)
    }

    pub fn occupation(&self, t: f64) -> Result<DVector<f64>, PathSimError> {
        occupation_measure(self.path, t)
    }

    pub fn martingale(&self, t: f64) -> Result<DVector<f64>, PathSimError> {
        dynkin_martingale(self.path, self.q, self.sc, t)
    }

    pub fn quadratic_variation(&self, t: f64) -> Result<DMatrix<f64>, PathSimError> {
        compensator(self.path, self.q, self.sc, t)
    }

    pub fn fluctuation(&self, t: f64) -> Result<DVector<f64>, PathSimError> {
        fluctuation_process(self.path, self.pi, self.sc, t)
    }
}

/// Dump a path as CSV: header `time,state`, first row `0,<initial>`, one
/// row per jump. States use 1-based labels; times print in shortest
/// round-trip form, which preserves every bit of the value.
pub fn write_path_csv(path: &CtmcPath, file: &Path) -> std::io::Result<()> {
    let mut out = String::from("time,state\n");
    out.push_str(&format!("0,{}\n", path.initial_state + 1));
    for (t, s) in path.jump_times.iter().zip(&path.post_jump_states) {
        out.push_str(&format!("{},{}\n", t, s + 1));
    }
    std::fs::write(file, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn symmetric_q() -> GeneratorMatrix {
        GeneratorMatrix::with_default_tol(DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]))
            .unwrap()
    }

    fn single_jump_path() -> CtmcPath {
        CtmcPath::new(2, 0, vec![0.4], vec![1], 1.0).unwrap()
    }

    fn unit_scaling() -> ScalingParams {
        ScalingParams::new(1, 1.0).unwrap()
    }

    #[test]
    fn occupation_of_single_jump_path() {
        let p = single_jump_path();
        let l = occupation_measure(&p, 1.0).unwrap();
        assert_abs_diff_eq!(l[0], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(l[1], 0.6, epsilon = 1e-15);
        let l0 = occupation_measure(&p, 0.0).unwrap();
        assert_eq!(l0.amax(), 0.0);
        // At the jump time itself nothing has accrued in the new state yet.
        let lj = occupation_measure(&p, 0.4).unwrap();
        assert_abs_diff_eq!(lj[0], 0.4, epsilon = 1e-15);
        assert_eq!(lj[1], 0.0);
    }

    #[test]
    fn indicator_is_right_continuous() {
        let p = single_jump_path();
        assert_eq!(p.state_at(0.0).unwrap(), 0);
        assert_eq!(p.state_at(0.4).unwrap(), 1);
        assert_eq!(p.state_at(0.39999).unwrap(), 0);
    }

    #[test]
    fn martingale_value_single_jump() {
        let p = single_jump_path();
        let y = dynkin_martingale(&p, &symmetric_q(), unit_scaling(), 1.0).unwrap();
        assert_abs_diff_eq!(y[0], -1.2, epsilon = 1e-14);
        assert_abs_diff_eq!(y[1], 1.2, epsilon = 1e-14);
        let y0 = dynkin_martingale(&p, &symmetric_q(), unit_scaling(), 0.0).unwrap();
        assert_eq!(y0.amax(), 0.0);
    }

    #[test]
    fn compensator_value_single_jump() {
        let p = single_jump_path();
        let c = compensator(&p, &symmetric_q(), unit_scaling(), 1.0).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!((c - expect).amax() < 1e-14);
    }

    #[test]
    fn fluctuation_value_single_jump() {
        let p = single_jump_path();
        let pi = DVector::from_vec(vec![0.5, 0.5]);
        let g = fluctuation_process(&p, &pi, unit_scaling(), 1.0).unwrap();
        assert_abs_diff_eq!(g[0], -0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(g[1], 0.1, epsilon = 1e-14);
    }

    #[test]
    fn sup_centered_occupation_single_jump() {
        let p = single_jump_path();
        let pi = DVector::from_vec(vec![0.5, 0.5]);
        let sup = sup_centered_occupation(&p, &pi);
        assert_abs_diff_eq!(sup, 0.2 * 2.0_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn out_of_horizon_queries_fail() {
        let p = single_jump_path();
        assert!(matches!(
            occupation_measure(&p, 1.5),
            Err(PathSimError::OutOfHorizon { .. })
        ));
        assert!(matches!(p.state_at(-0.1), Err(PathSimError::OutOfHorizon { .. })));
    }

    #[test]
    fn path_validation_rejects_bad_inputs() {
        assert!(CtmcPath::new(2, 0, vec![0.5, 0.4], vec![1, 0], 1.0).is_err());
        assert!(CtmcPath::new(2, 0, vec![0.4, 0.4], vec![1, 0], 1.0).is_err());
        assert!(CtmcPath::new(2, 0, vec![0.4], vec![0], 1.0).is_err());
        assert!(CtmcPath::new(2, 0, vec![1.4], vec![1], 1.0).is_err());
        assert!(CtmcPath::new(2, 5, vec![], vec![], 1.0).is_err());
        assert!(CtmcPath::new(2, 0, vec![0.4], vec![7], 1.0).is_err());
    }

    #[test]
    fn simulation_is_reproducible() {
        let q = symmetric_q();
        let sc = ScalingParams::new(100, 1.0).unwrap();
        let init = PathInit::Fixed(0);
        let a = simulate_path(&q, sc, 1.0, &init, 42).unwrap();
        let b = simulate_path(&q, sc, 1.0, &init, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_path(&q, sc, 1.0, &init, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_initial_state_is_reproducible() {
        let q = symmetric_q();
        let sc = unit_scaling();
        let init = PathInit::Distribution(DVector::from_vec(vec![0.5, 0.5]));
        let a = simulate_path(&q, sc, 1.0, &init, 7).unwrap();
        let b = simulate_path(&q, sc, 1.0, &init, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_exit_rate_is_reported() {
        let q = GeneratorMatrix::with_default_tol(DMatrix::from_row_slice(1, 1, &[0.0])).unwrap();
        let sc = unit_scaling();
        match simulate_path(&q, sc, 1.0, &PathInit::Fixed(0), 1) {
            Err(PathSimError::ZeroExitRate(0)) => {}
            other => panic!("expected ZeroExitRate, got {other:?}"),
        }
    }

    #[test]
    fn horizon_guard_trips() {
        let q = symmetric_q();
        let sc = ScalingParams::new(1_000_000, 2.0).unwrap();
        match simulate_path(&q, sc, 1000.0, &PathInit::Fixed(0), 1) {
            Err(PathSimError::HorizonTooLarge { .. }) => {}
            other => panic!("expected HorizonTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn bad_initial_distribution_is_rejected() {
        let q = symmetric_q();
        let sc = unit_scaling();
        let badsum = PathInit::Distribution(DVector::from_vec(vec![0.5, 0.4]));
        assert!(matches!(
            simulate_path(&q, sc, 1.0, &badsum, 1),
            Err(PathSimError::InvalidInit(_))
        ));
        let neg = PathInit::Distribution(DVector::from_vec(vec![1.5, -0.5]));
        assert!(matches!(
            simulate_path(&q, sc, 1.0, &neg, 1),
            Err(PathSimError::InvalidInit(_))
        ));
        assert!(matches!(
            simulate_path(&q, sc, 1.0, &PathInit::Fixed(9), 1),
            Err(PathSimError::InvalidInit(_))
        ));
    }

    #[test]
    fn batch_matches_individual_queries() {
        let q = symmetric_q();
        let sc = ScalingParams::new(10, 1.0).unwrap();
        let p = simulate_path(&q, sc, 1.0, &PathInit::Fixed(0), 5).unwrap();
        let times = [0.0, 0.25, 0.25, 0.5, 0.99, 1.0];
        let batch = occupation_batch(&p, &times).unwrap();
        for (l, &t) in batch.iter().zip(times.iter()) {
            let single = occupation_measure(&p, t).unwrap();
            assert!((l - single).amax() < 1e-15);
        }
        assert!(occupation_batch(&p, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn csv_dump_matches_expected_layout() {
        let p = single_jump_path();
        let dir = std::env::temp_dir().join("occusim_path_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("path.csv");
        write_path_csv(&p, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        assert_eq!(text, "time,state\n0,1\n0.4,2\n");
    }

    #[test]
    fn scaling_params_validate() {
        assert!(ScalingParams::new(0, 1.0).is_err());
        assert!(ScalingParams::new(1, 0.0).is_err());
        assert!(ScalingParams::new(1, f64::NAN).is_err());
        let sc = ScalingParams::new(100, 1.0).unwrap();
        assert_abs_diff_eq!(sc.half_speed_factor(), 10.0, epsilon = 1e-12);
        assert_eq!(sc.speed_factor(), sc.half_speed_factor() * sc.half_speed_factor());
    }
}
