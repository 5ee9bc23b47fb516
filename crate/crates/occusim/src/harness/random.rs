//! Random test-case factories shared by the randomized suites. Every
//! draw comes from a caller-provided stream, so a case index pins down
//! the whole case.

use crate::bv_toolkit::BvFunction;
use crate::chain_algebra::GeneratorMatrix;
use crate::stoch_integral::PiecewiseFunction;
use crate::streams::RandomStream;
use nalgebra::DMatrix;

/// Random irreducible generator on `d >= 2` states. A cycle of rates in
/// `[0.2, 2)` guarantees irreducibility; further edges appear with
/// probability one half.
pub fn random_generator(d: usize, stream: &mut RandomStream) -> GeneratorMatrix {
    assert!(d >= 2, "need at least two states");
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let next = (i + 1) % d;
        m[(i, next)] = stream.uniform_in(0.2, 2.0);
        for j in 0..d {
            if j != i && j != next && stream.uniform() < 0.5 {
                m[(i, j)] = 2.0 * stream.uniform();
            }
        }
    }
    for i in 0..d {
        let exit: f64 = (0..d).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
        m[(i, i)] = -exit;
    }
    GeneratorMatrix::with_default_tol(m).expect("cycle construction always yields a generator")
}

fn random_cuts(stream: &mut RandomStream, horizon: f64, max_interior: usize) -> Vec<f64> {
    let interior = stream.pick(max_interior + 1);
    let mut cuts: Vec<f64> = (0..interior).map(|_| stream.uniform_in(0.0, horizon)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut breakpoints = Vec::with_capacity(cuts.len() + 2);
    breakpoints.push(0.0);
    breakpoints.extend(cuts);
    breakpoints.push(horizon);
    breakpoints
}

fn random_matrix(stream: &mut RandomStream, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| stream.uniform_in(-scale, scale))
}

/// Random piecewise-affine matrix integrand on `[0, horizon]` with up to
/// `max_interior` interior breakpoints.
pub fn random_piecewise(
    stream: &mut RandomStream,
    rows: usize,
    cols: usize,
    horizon: f64,
    max_interior: usize,
) -> PiecewiseFunction {
    let breakpoints = random_cuts(stream, horizon, max_interior);
    let segments = breakpoints.len() - 1;
    let offsets = (0..segments).map(|_| random_matrix(stream, rows, cols, 2.0)).collect();
    let slopes = (0..segments).map(|_| random_matrix(stream, rows, cols, 2.0)).collect();
    PiecewiseFunction::new(breakpoints, offsets, slopes).expect("random cuts are valid")
}

/// Random scalar function of bounded variation: half the time continuous
/// piecewise linear, half the time with jumps.
pub fn random_bv(stream: &mut RandomStream, horizon: f64, max_interior: usize) -> BvFunction {
    let breakpoints = random_cuts(stream, horizon, max_interior);
    if stream.uniform() < 0.5 {
        let points: Vec<(f64, f64)> =
            breakpoints.iter().map(|&t| (t, stream.uniform_in(-2.0, 2.0))).collect();
        BvFunction::from_points(&points).expect("random points are valid")
    } else {
        let segments = breakpoints.len() - 1;
        let offsets = (0..segments).map(|_| stream.uniform_in(-2.0, 2.0)).collect();
        let slopes = (0..segments).map(|_| stream.uniform_in(-3.0, 3.0)).collect();
        BvFunction::from_segments(breakpoints, offsets, slopes).expect("random cuts are valid")
    }
}
