//! Randomized invariants of the path simulator and its functionals.

mod support;

use nalgebra::{DMatrix, DVector};
use occusim::chain_algebra::{ChainInvariants, GeneratorMatrix};
use occusim::path_sim::{self, PathInit, ScalingParams};
use proptest::prelude::*;

fn generator_strategy() -> impl Strategy<Value = GeneratorMatrix> {
    (2usize..=5)
        .prop_flat_map(|d| (Just(d), proptest::collection::vec(0.05..2.0f64, d * d)))
        .prop_map(|(d, rates)| {
            let mut q = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        q[(i, j)] = rates[i * d + j];
                    }
                }
                let row_sum: f64 = (0..d).filter(|&j| j != i).map(|j| q[(i, j)]).sum();
                q[(i, i)] = -row_sum;
            }
            GeneratorMatrix::with_default_tol(q).unwrap()
        })
}

fn scaling_strategy() -> impl Strategy<Value = ScalingParams> {
    (1u64..=64, 0.3..1.5f64).prop_map(|(n, alpha)| ScalingParams::new(n, alpha).unwrap())
}

proptest! {
    #[test]
    fn conservation_laws_hold_along_simulated_paths(
        q in generator_strategy(),
        sc in scaling_strategy(),
        horizon in 0.3..2.0f64,
        frac in 0.05..1.0f64,
        seed in any::<u64>(),
    ) {
        let inv = ChainInvariants::compute(&q).unwrap();
        let path = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(0), seed).unwrap();
        let t = frac * horizon;
        let k = path_sim::state_indicator(&path, t).unwrap();
        let l = path_sim::occupation_measure(&path, t).unwrap();
        let y = path_sim::dynkin_martingale(&path, &q, sc, t).unwrap();
        let g = path_sim::fluctuation_process(&path, &inv.pi, sc, t).unwrap();
        prop_assert!((k.sum() - 1.0).abs() < 1e-12);
        prop_assert!((l.sum() - t).abs() < 1e-9 * 1.0_f64.max(t));
        prop_assert!(l.min() >= 0.0 && l.max() <= t + 1e-12);
        prop_assert!(y.sum().abs() <= 1e-9 * 1.0_f64.max(y.amax()));
        prop_assert!(g.sum().abs() <= 1e-9 * 1.0_f64.max(g.amax()));
    }

    #[test]
    fn paths_are_right_continuous_at_their_jumps(
        q in generator_strategy(),
        horizon in 0.3..2.0f64,
        seed in any::<u64>(),
    ) {
        let sc = ScalingParams::new(8, 1.0).unwrap();
        let path = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(0), seed).unwrap();
        for k in 0..path.jump_count() {
            let (before, after) = path.jump_transition(k);
            prop_assert_ne!(before, after);
            let jump_time = path.jump_times()[k];
            prop_assert_eq!(path.state_at(jump_time).unwrap(), after);
            let previous = if k == 0 { 0.0 } else { path.jump_times()[k - 1] };
            prop_assert_eq!(path.state_at(0.5 * (previous + jump_time)).unwrap(), before);
        }
    }

    #[test]
    fn identical_seeds_reproduce_paths(
        q in generator_strategy(),
        sc in scaling_strategy(),
        horizon in 0.3..2.0f64,
        seed in any::<u64>(),
    ) {
        let first = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(1), seed).unwrap();
        let second = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(1), seed).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn compensator_is_psd_symmetric_and_annihilates_ones(
        q in generator_strategy(),
        sc in scaling_strategy(),
        horizon in 0.3..2.0f64,
        seed in any::<u64>(),
    ) {
        let path = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(0), seed).unwrap();
        let bracket = path_sim::compensator(&path, &q, sc, horizon).unwrap();
        let scale = 1.0_f64.max(bracket.amax());
        prop_assert!((&bracket - bracket.transpose()).amax() <= 1e-10 * scale);
        let ones = DVector::from_element(path.dim(), 1.0);
        prop_assert!((&bracket * &ones).amax() <= 1e-9 * scale);
        let min_eig = bracket
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        prop_assert!(min_eig >= -1e-9 * scale, "min eigenvalue {min_eig}");
    }

    #[test]
    fn supremum_dominates_sampled_fluctuations(
        q in generator_strategy(),
        horizon in 0.3..2.0f64,
        frac in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let sc = ScalingParams::new(6, 1.0).unwrap();
        let inv = ChainInvariants::compute(&q).unwrap();
        let path = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(0), seed).unwrap();
        let sup = path_sim::sup_centered_occupation(&path, &inv.pi);
        let t = frac * horizon;
        let l = path_sim::occupation_measure(&path, t).unwrap();
        let norm = (l - &inv.pi * t).norm();
        prop_assert!(sup >= norm - 1e-12);
    }

    #[test]
    fn martingale_plus_drift_reconstructs_indicator(
        q in generator_strategy(),
        sc in scaling_strategy(),
        horizon in 0.3..2.0f64,
        frac in 0.05..1.0f64,
        seed in any::<u64>(),
    ) {
        let path = path_sim::simulate_path(&q, sc, horizon, &PathInit::Fixed(0), seed).unwrap();
        let t = frac * horizon;
        let k = path_sim::state_indicator(&path, t).unwrap();
        let k0 = path_sim::state_indicator(&path, 0.0).unwrap();
        let l = path_sim::occupation_measure(&path, t).unwrap();
        let y = path_sim::dynkin_martingale(&path, &q, sc, t).unwrap();
        let drift = (q.entries().transpose() * l) * sc.speed_factor();
        let residual = (&k - &k0 - (&y + &drift)).amax();
        prop_assert!(residual <= 1e-9 * 1.0_f64.max(y.amax()));
    }
}

#[test]
fn occupation_measure_matches_riemann_scan() {
    let q = GeneratorMatrix::with_default_tol(DMatrix::from_row_slice(
        3,
        3,
        &[-1.5, 1.0, 0.5, 0.3, -0.8, 0.5, 0.7, 0.9, -1.6],
    ))
    .unwrap();
    let sc = ScalingParams::new(5, 1.0).unwrap();
    for seed in [3u64, 14, 159, 2653] {
        let path = path_sim::simulate_path(&q, sc, 1.0, &PathInit::Fixed(2), seed).unwrap();
        let l = path_sim::occupation_measure(&path, 1.0).unwrap();
        let steps = 200_000;
        let dt = 1.0 / steps as f64;
        let mut riemann = DVector::zeros(3);
        for k in 0..steps {
            let s = (k as f64 + 0.5) * dt;
            riemann[support::state_from_jump_data(&path, s)] += dt;
        }
        let gap = (l - riemann).amax();
        assert!(gap < 1e-3, "seed {seed}: occupation off the grid scan by {gap:.2e}");
    }
}
