//! Shared helpers for the integration tests: independent oracles built
//! on a hand-rolled matrix exponential and Riemann sums, plus config
//! builders. The oracles deliberately avoid the linear solves and
//! closed-form antiderivatives used by the library.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use occusim::harness::config::ExperimentConfig;
use occusim::path_sim::{CtmcPath, ScalingParams};
use occusim::stoch_integral::PiecewiseFunction;

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    assert_eq!(d, m.ncols());
    let norm = m.amax() * d as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut sum = DMatrix::<f64>::identity(d, d);
    let mut term = DMatrix::<f64>::identity(d, d);
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Deviation-matrix oracle: integrate `exp(Qs) - P` over a horizon long
/// enough that the semigroup has converged, using the augmented block
/// exponential for the integral and repeated squaring for the limit `P`.
/// No linear system is solved anywhere.
pub fn deviation_oracle(q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = q.nrows();
    let mut horizon = 1.0;
    let mut semigroup = expm(&(q * horizon));
    for _ in 0..60 {
        let doubled = &semigroup * &semigroup;
        if (&doubled - &semigroup).amax() < 1e-11 {
            break;
        }
        semigroup = doubled;
        horizon *= 2.0;
    }
    let projector = &semigroup * &semigroup;
    let mut augmented = DMatrix::<f64>::zeros(2 * d, 2 * d);
    augmented.view_mut((0, 0), (d, d)).copy_from(q);
    augmented.view_mut((0, d), (d, d)).copy_from(&DMatrix::identity(d, d));
    let block = expm(&(augmented * horizon));
    let integral = block.view((0, d), (d, d)).into_owned();
    integral - projector * horizon
}

/// Stationary-law oracle: a row of the converged semigroup.
pub fn stationary_oracle(q: &DMatrix<f64>) -> DVector<f64> {
    let mut semigroup = expm(q);
    for _ in 0..60 {
        let doubled = &semigroup * &semigroup;
        if (&doubled - &semigroup).amax() < 1e-12 {
            break;
        }
        semigroup = doubled;
    }
    semigroup.row(0).transpose()
}

/// Midpoint-rule oracle for `int_0^t H1(s) Sigma H2(s)^T ds`.
pub fn riemann_cross_covariance(
    h1: &PiecewiseFunction,
    h2: &PiecewiseFunction,
    sigma: &DMatrix<f64>,
    t: f64,
    steps: usize,
) -> DMatrix<f64> {
    let mut sum = DMatrix::zeros(h1.nrows(), h2.nrows());
    let dt = t / steps as f64;
    for k in 0..steps {
        let s = (k as f64 + 0.5) * dt;
        sum += h1.value(s) * sigma * h2.value(s).transpose() * dt;
    }
    sum
}

/// State of a path at time `s`, recovered from the raw jump data.
pub fn state_from_jump_data(path: &CtmcPath, s: f64) -> usize {
    let mut state = path.initial_state();
    for (time, &next) in path.jump_times().iter().zip(path.post_jump_states()) {
        if *time <= s {
            state = next;
        } else {
            break;
        }
    }
    state
}

/// Midpoint-rule oracle for the integral of `H` against the centered and
/// scaled occupation fluctuation.
pub fn riemann_occupation_integral(
    h: &PiecewiseFunction,
    path: &CtmcPath,
    pi: &DVector<f64>,
    scaling: ScalingParams,
    t: f64,
    steps: usize,
) -> DVector<f64> {
    let mut sum = DVector::zeros(h.nrows());
    let dt = t / steps as f64;
    for k in 0..steps {
        let s = (k as f64 + 0.5) * dt;
        let hs = h.value(s);
        let state = state_from_jump_data(path, s);
        let mut centered = -pi.clone();
        centered[state] += 1.0;
        sum += hs * centered * dt;
    }
    sum * scaling.half_speed_factor()
}

/// Builds a validated config from literal JSON.
pub fn config_from_json(json: &str) -> ExperimentConfig {
    let config: ExperimentConfig = serde_json::from_str(json).expect("config parses");
    config.validate().expect("config is valid");
    config
}

pub fn symmetric_generator_rows() -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0], vec![1.0, -1.0]]
}

pub fn asymmetric_generator_rows() -> Vec<Vec<f64>> {
    vec![vec![-1.0, 1.0], vec![2.0, -2.0]]
}
