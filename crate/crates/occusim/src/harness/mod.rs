//! Monte Carlo experiments tying the pathwise functionals to their
//! closed-form limits, plus the config, reporting, and statistics around
//! them.
//!
//! Five experiments, one per subcommand:
//!
//! * `identities`: exact residual checks of the generator algebra, on the
//!   configured chain and on a batch of random chains,
//! * `ergodic`: the scaled occupation supremum must decay along the grid,
//! * `fclt`: martingale and occupation fluctuations against their
//!   Gaussian limit covariances, with a distribution test,
//! * `integral`: pathwise integrals against the closed-form limit
//!   covariance of the integral limits,
//! * `bv`: randomized certification of the variation inequalities.
//!
//! Every replication derives its own seed from the master seed and a
//! replication index, so reports are reproducible run to run and
//! independent of thread scheduling.

pub mod config;
pub mod random;
pub mod report;
pub mod stats;

use crate::bv_toolkit::{self, BvError, BvFunction};
use crate::chain_algebra::{verify_identities, ChainAlgebraError, ChainInvariants};
use crate::path_sim::{self, PathInit, PathSimError, ScalingParams};
use crate::stoch_integral::{self, IntegralError, PiecewiseFunction};
use crate::streams::{derive_seed, RandomStream};
use config::ExperimentConfig;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use report::{ConvergenceReport, ReportRow};
use stats::{ks_normal_test, quantile, MatrixMoments, SecondMoment, VectorMoments};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

/// Relative tolerance for the exact identity residuals.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Ceiling for the scaled integrand variation certificate.
pub const VARIATION_THRESHOLD: f64 = 0.1;
/// Rounding slack allowed below zero for inequality slacks.
pub const SLACK_FLOOR: f64 = -1e-12;
/// Overall decay the ergodic medians must achieve across the grid.
pub const DECAY_RATIO_LIMIT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("the scaling grid needs at least two levels to compare, got {0}")]
    GridTooSmall(usize),
    #[error("the coordinate projection used by the distribution test is degenerate")]
    DegenerateProjection,
    #[error(transparent)]
    Chain(#[from] ChainAlgebraError),
    #[error(transparent)]
    Path(#[from] PathSimError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Bv(#[from] BvError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Exact identity checks: residuals of the fundamental-matrix algebra on
/// the configured generator, then the worst relative residual over
/// `replications` random generators with 2 to 8 states.
pub fn run_identity_suite(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ConvergenceReport, HarnessError> {
    let start = Instant::now();
    let q = config.resolve_generator(base_dir)?;
    let inv = ChainInvariants::compute(&q)?;
    let mut report = ConvergenceReport::new("identities", config.master_seed);
    for residual in &verify_identities(&q, &inv, IDENTITY_TOL).residuals {
        report.rows.push(ReportRow::at_most(
            0,
            format!("rel_res_{}", residual.name),
            residual.relative,
            IDENTITY_TOL,
            0.0,
        ));
    }
    let mut worst = 0.0_f64;
    for rep in 0..config.replications {
        let mut stream = RandomStream::new(config.master_seed, rep as u64);
        let d = 2 + stream.pick(7);
        let rq = random::random_generator(d, &mut stream);
        let rinv = ChainInvariants::compute(&rq)?;
        worst = worst.max(verify_identities(&rq, &rinv, IDENTITY_TOL).max_relative());
    }
    report.rows.push(ReportRow::at_most(0, "random_batch_max_rel_res", worst, IDENTITY_TOL, 0.0));
    report.notes.push(format!(
        "random batch: {} generators with 2 to 8 states",
        config.replications
    ));
    report.runtime = start.elapsed();
    report.sort_rows();
    Ok(report)
}

/// Ergodic decay of the centered occupation supremum: the statistic
/// `n^(alpha/2 - epsilon) sup_t ||L(t) - pi t||` must shrink along the
/// grid. Medians must decrease strictly, the 95% quantiles must not
/// increase, and the last median must be at most half the first.
pub fn run_ergodic_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ConvergenceReport, HarnessError> {
    let start = Instant::now();
    if config.n_grid.len() < 2 {
        return Err(HarnessError::GridTooSmall(config.n_grid.len()));
    }
    let q = config.resolve_generator(base_dir)?;
    let inv = ChainInvariants::compute(&q)?;
    let epsilon = config.resolved_epsilon();
    let init = config.resolve_init(&inv.pi, PathInit::Fixed(0))?;
    let horizon = config.horizon;
    let reps = config.replications;
    let mut report = ConvergenceReport::new("ergodic", config.master_seed);
    let mut medians: Vec<f64> = Vec::new();
    let mut upper_tails: Vec<f64> = Vec::new();
    for (ni, &n) in config.n_grid.iter().enumerate() {
        let sc = ScalingParams::new(n, config.alpha)?;
        let rate = (n as f64).powf(config.alpha / 2.0 - epsilon);
        let mut sups: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<f64, HarnessError> {
                let seed = derive_seed(config.master_seed, (ni * reps + rep) as u64);
                let path = path_sim::simulate_path(&q, sc, horizon, &init, seed)?;
                Ok(rate * path_sim::sup_centered_occupation(&path, &inv.pi))
            })
            .collect::<Result<_, _>>()?;
        sups.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = quantile(&sups, 0.5);
        let tail = quantile(&sups, 0.95);
        match medians.last() {
            Some(&prev) => {
                report.rows.push(ReportRow::strictly_below(n, "ergodic_sup_median", median, prev))
            }
            None => report.rows.push(ReportRow::info(n, "ergodic_sup_median", median, median)),
        }
        match upper_tails.last() {
            Some(&prev) => {
                report.rows.push(ReportRow::at_most(n, "ergodic_sup_q95", tail, prev, 0.0))
            }
            None => report.rows.push(ReportRow::info(n, "ergodic_sup_q95", tail, tail)),
        }
        medians.push(median);
        upper_tails.push(tail);
    }
    report.rows.push(ReportRow::at_most(
        *config.n_grid.last().unwrap(),
        "ergodic_median_decay_ratio",
        medians.last().unwrap() / medians.first().unwrap(),
        DECAY_RATIO_LIMIT,
        0.0,
    ));
    report.notes.push(format!(
        "statistic: n^(alpha/2 - epsilon) * sup_t ||L(t) - pi t||_2 with epsilon = {epsilon}"
    ));
    report.runtime = start.elapsed();
    report.sort_rows();
    Ok(report)
}

/// Gaussian limits of the compensated indicator and of the occupation
/// fluctuation: per grid level the scaled martingale must be centered,
/// its raw second moment must match the mean compensator exactly and the
/// limit covariance approximately, the fluctuation covariance must match
/// its limit, and at the largest level a projection of the fluctuation
/// must pass a normality test.
pub fn run_fclt_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ConvergenceReport, HarnessError> {
    let start = Instant::now();
    let q = config.resolve_generator(base_dir)?;
    let inv = ChainInvariants::compute(&q)?;
    let d = q.dim();
    if d < 2 {
        return Err(HarnessError::DegenerateProjection);
    }
    let init = config.resolve_init(&inv.pi, PathInit::Distribution(inv.pi.clone()))?;
    let horizon = config.horizon;
    let reps = config.replications;
    let level = config.resolved_test_level();
    let largest = *config.n_grid.last().unwrap();
    let mut u = DVector::zeros(d);
    u[0] = 1.0;
    u[1] = -1.0;
    let proj_sd = ((&u.transpose() * &inv.sigma_x * &u)[(0, 0)] * horizon).sqrt();
    if !(proj_sd > 0.0) {
        return Err(HarnessError::DegenerateProjection);
    }
    let mut report = ConvergenceReport::new("fclt", config.master_seed);
    for (ni, &n) in config.n_grid.iter().enumerate() {
        let sc = ScalingParams::new(n, config.alpha)?;
        let samples: Vec<(DVector<f64>, DMatrix<f64>, DVector<f64>)> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<_, HarnessError> {
                let seed = derive_seed(config.master_seed, (ni * reps + rep) as u64);
                let path = path_sim::simulate_path(&q, sc, horizon, &init, seed)?;
                let y = path_sim::dynkin_martingale(&path, &q, sc, horizon)?
                    / sc.half_speed_factor();
                let bracket = path_sim::compensator(&path, &q, sc, horizon)? / sc.speed_factor();
                let g = path_sim::fluctuation_process(&path, &inv.pi, sc, horizon)?;
                Ok((y, bracket, g))
            })
            .collect::<Result<_, _>>()?;
        let mut y_mean = VectorMoments::new(d);
        let mut y_sq = SecondMoment::new(d);
        let mut bracket_mean = MatrixMoments::new(d, d);
        let mut g_sq = SecondMoment::new(d);
        let mut projections = Vec::new();
        for (y, bracket, g) in &samples {
            y_mean.push(y);
            y_sq.push(y);
            bracket_mean.push(bracket);
            g_sq.push(g);
            if n == largest {
                projections.push(u.dot(g) / proj_sd);
            }
        }
        let mean = y_mean.mean();
        let mean_se = y_mean.standard_error();
        let m_y = y_sq.moment();
        let se_y = y_sq.standard_error();
        let m_b = bracket_mean.mean();
        let se_b = bracket_mean.standard_error();
        let m_g = g_sq.moment();
        let se_g = g_sq.standard_error();
        for i in 0..d {
            report.rows.push(ReportRow::close_to(
                n,
                format!("fclt_mean_Y_{}", i + 1),
                mean[i],
                0.0,
                mean_se[i],
            ));
            for j in i..d {
                report.rows.push(ReportRow::close_to(
                    n,
                    format!("fclt_moment_gap_{}{}", i + 1, j + 1),
                    m_y[(i, j)] - m_b[(i, j)],
                    0.0,
                    se_y[(i, j)] + se_b[(i, j)],
                ));
                report.rows.push(ReportRow::close_to(
                    n,
                    format!("fclt_cov_Y_{}{}", i + 1, j + 1),
                    m_y[(i, j)],
                    inv.sigma_y[(i, j)] * horizon,
                    se_y[(i, j)],
                ));
                report.rows.push(ReportRow::close_to(
                    n,
                    format!("fclt_cov_G_{}{}", i + 1, j + 1),
                    m_g[(i, j)],
                    inv.sigma_x[(i, j)] * horizon,
                    se_g[(i, j)],
                ));
            }
        }
        if n == largest {
            let ks = ks_normal_test(&projections);
            report.rows.push(ReportRow::at_least(n, "fclt_ks_pvalue_proj", ks.p_value, level));
        }
    }
    report.notes.push(
        "martingale and compensator are rescaled by n^(-alpha/2) and n^(-alpha) before averaging"
            .into(),
    );
    report.notes.push(
        "distribution test: first minus second fluctuation coordinate, standardized by its limit"
            .into(),
    );
    report.runtime = start.elapsed();
    report.sort_rows();
    Ok(report)
}

/// Pathwise integrals against their Gaussian limits: the stacked
/// integrals against the fluctuation and against the scaled martingale
/// must reproduce the closed-form limit covariances, the variation
/// certificate must hold at the largest level, and swapping the
/// fluctuation integrator for the transported martingale one must leave
/// the variances aligned.
pub fn run_integral_experiment(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ConvergenceReport, HarnessError> {
    let start = Instant::now();
    let q = config.resolve_generator(base_dir)?;
    let inv = ChainInvariants::compute(&q)?;
    let integrands = config.resolve_integrands(q.dim())?;
    if integrands.is_empty() {
        return Err(HarnessError::InvalidConfig(
            "the integral experiment needs at least one integrand".into(),
        ));
    }
    let init = config.resolve_init(&inv.pi, PathInit::Distribution(inv.pi.clone()))?;
    let horizon = config.horizon;
    let reps = config.replications;
    let largest = *config.n_grid.last().unwrap();
    let dims: Vec<usize> = integrands.iter().map(|h| h.nrows()).collect();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &len| {
            let here = *acc;
            *acc += len;
            Some(here)
        })
        .collect();
    let total: usize = dims.iter().sum();

    let mut target_g = DMatrix::zeros(total, total);
    let mut target_y = DMatrix::zeros(total, total);
    for (j, hj) in integrands.iter().enumerate() {
        for (k, hk) in integrands.iter().enumerate() {
            let block_g = stoch_integral::limit_cross_covariance(hj, hk, &inv.sigma_x, horizon)?;
            target_g.view_mut((offsets[j], offsets[k]), (dims[j], dims[k])).copy_from(&block_g);
            let block_y = stoch_integral::limit_cross_covariance(hj, hk, &inv.sigma_y, horizon)?;
            target_y.view_mut((offsets[j], offsets[k]), (dims[j], dims[k])).copy_from(&block_y);
        }
    }
    let fundamental_t = inv.fundamental.transpose();
    let transported: Vec<PiecewiseFunction> = integrands
        .iter()
        .map(|h| h.right_multiply(&fundamental_t))
        .collect::<Result<_, _>>()?;

    let mut report = ConvergenceReport::new("integral", config.master_seed);
    for (ni, &n) in config.n_grid.iter().enumerate() {
        let sc = ScalingParams::new(n, config.alpha)?;
        let with_transport = n == largest;
        let samples: Vec<(DVector<f64>, DVector<f64>, Option<DVector<f64>>)> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<_, HarnessError> {
                let seed = derive_seed(config.master_seed, (ni * reps + rep) as u64);
                let path = path_sim::simulate_path(&q, sc, horizon, &init, seed)?;
                let mut a = DVector::zeros(total);
                let mut b = DVector::zeros(total);
                for (j, h) in integrands.iter().enumerate() {
                    let aj =
                        stoch_integral::integrate_wrt_occupation(h, &path, &inv.pi, sc, horizon)?;
                    a.rows_mut(offsets[j], dims[j]).copy_from(&aj);
                    let bj = stoch_integral::integrate_wrt_dynkin(h, &path, &q, sc, horizon)?;
                    b.rows_mut(offsets[j], dims[j]).copy_from(&bj);
                }
                let c = if with_transport {
                    let mut c = DVector::zeros(total);
                    for (j, h) in transported.iter().enumerate() {
                        let cj = stoch_integral::integrate_wrt_dynkin(h, &path, &q, sc, horizon)?;
                        c.rows_mut(offsets[j], dims[j]).copy_from(&cj);
                    }
                    Some(c)
                } else {
                    None
                };
                Ok((a, b, c))
            })
            .collect::<Result<_, _>>()?;
        let mut a_sq = SecondMoment::new(total);
        let mut b_sq = SecondMoment::new(total);
        let mut c_sq = SecondMoment::new(total);
        for (a, b, c) in &samples {
            a_sq.push(a);
            b_sq.push(b);
            if let Some(c) = c {
                c_sq.push(c);
            }
        }
        let m_a = a_sq.moment();
        let se_a = a_sq.standard_error();
        let m_b = b_sq.moment();
        let se_b = b_sq.standard_error();
        for p in 0..total {
            for r in p..total {
                report.rows.push(ReportRow::close_to(
                    n,
                    format!("int_cov_G_{}{}", p + 1, r + 1),
                    m_a[(p, r)],
                    target_g[(p, r)],
                    se_a[(p, r)],
                ));
                report.rows.push(ReportRow::close_to(
                    n,
                    format!("int_cov_Y_{}{}", p + 1, r + 1),
                    m_b[(p, r)],
                    target_y[(p, r)],
                    se_b[(p, r)],
                ));
            }
        }
        for (j, h) in integrands.iter().enumerate() {
            let certificate = stoch_integral::scaled_variation_condition(h, sc, horizon)?;
            if with_transport {
                report.rows.push(ReportRow::at_most(
                    n,
                    format!("int_var_cert_H{}", j + 1),
                    certificate.scaled_max(),
                    VARIATION_THRESHOLD,
                    0.0,
                ));
            } else {
                report.rows.push(ReportRow::info(
                    n,
                    format!("int_var_cert_info_H{}", j + 1),
                    certificate.scaled_max(),
                    VARIATION_THRESHOLD,
                ));
            }
        }
        if with_transport {
            let m_c = c_sq.moment();
            let se_c = c_sq.standard_error();
            for p in 0..total {
                let combined = se_a[(p, p)] + se_c[(p, p)];
                report.rows.push(ReportRow::at_most(
                    n,
                    format!("int_transport_var_gap_{}", p + 1),
                    (m_a[(p, p)] - m_c[(p, p)]).abs(),
                    2.0 * combined,
                    combined,
                ));
            }
        }
    }
    report.notes.push(
        "cov rows compare raw second moments of the stacked integrals with the limit covariance"
            .into(),
    );
    report.notes.push(format!(
        "certificate: n^(-alpha/2) * entrywise integrand variation stays within {VARIATION_THRESHOLD}"
    ));
    report.notes.push(
        "var gap: integrating the fluctuation versus the martingale transported by the \
         transposed fundamental matrix"
            .into(),
    );
    report.runtime = start.elapsed();
    report.sort_rows();
    Ok(report)
}

/// Randomized certification of the four variation inequalities. Each row
/// reports the smallest observed slack over all cases; a slack below the
/// rounding floor means a genuine violation.
pub fn run_bv_suite(
    config: &ExperimentConfig,
    base_dir: &Path,
) -> Result<ConvergenceReport, HarnessError> {
    let start = Instant::now();
    let q = config.resolve_generator(base_dir)?;
    let d = q.dim();
    let sc = ScalingParams::new(config.n_grid[0], config.alpha)?;
    let horizon = config.horizon;
    let cases = config.replications;
    let mut min_slack = [f64::INFINITY; 4];
    for case in 0..cases {
        let base = (case * 8) as u64;

        let mut s1 = RandomStream::new(config.master_seed, base);
        let x = random::random_bv(&mut s1, horizon, 6);
        let t_mid = s1.uniform_in(0.0, horizon);
        for t in [horizon, t_mid] {
            let check = bv_toolkit::boundedness_bound(&x, t)?;
            min_slack[0] = min_slack[0].min(check.slack());
        }

        let mut s2 = RandomStream::new(config.master_seed, base + 1);
        let x = random::random_bv(&mut s2, horizon, 6);
        let check = match s2.pick(3) {
            0 => bv_toolkit::lipschitz_composition_bound(&x, f64::abs, 1.0, horizon)?,
            1 => bv_toolkit::lipschitz_composition_bound(&x, f64::sin, 1.0, horizon)?,
            _ => {
                let bound = 2.0 * x.sup_abs(horizon)?;
                bv_toolkit::lipschitz_composition_bound(&x, |u| u * u, bound, horizon)?
            }
        };
        min_slack[1] = min_slack[1].min(check.slack());

        let mut s3 = RandomStream::new(config.master_seed, base + 2);
        let x = random::random_bv(&mut s3, horizon, 6);
        let y = random::random_bv(&mut s3, horizon, 6);
        let t_mid = s3.uniform_in(0.0, horizon);
        for t in [horizon, t_mid] {
            let check = bv_toolkit::product_variation_bound(&x, &y, t)?;
            min_slack[2] = min_slack[2].min(check.slack());
        }

        let mut s4 = RandomStream::new(config.master_seed, base + 3);
        let init = PathInit::Fixed(s4.pick(d));
        let path_seed = derive_seed(config.master_seed, base + 4);
        let path = path_sim::simulate_path(&q, sc, horizon, &init, path_seed)?;
        let indicator = BvFunction::binary_indicator(&path, s4.pick(d))?;
        let y = random::random_bv(&mut s4, horizon, 6);
        let check = bv_toolkit::alternating_jump_bound(&y, &indicator, horizon)?;
        min_slack[3] = min_slack[3].min(check.slack());
    }
    let mut report = ConvergenceReport::new("bv", config.master_seed);
    let names = [
        "bv_bounded_min_slack",
        "bv_composition_min_slack",
        "bv_product_min_slack",
        "bv_alternating_min_slack",
    ];
    for (name, slack) in names.iter().zip(min_slack) {
        report.rows.push(ReportRow::at_least(0, *name, slack, SLACK_FLOOR));
    }
    report.notes.push(format!("{cases} random cases per inequality"));
    report.notes.push(
        "inequality order: boundedness, Lipschitz composition, products, alternating jump sums"
            .into(),
    );
    report.runtime = start.elapsed();
    report.sort_rows();
    Ok(report)
}
