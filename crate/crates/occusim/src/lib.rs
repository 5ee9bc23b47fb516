//! Occupation-measure laboratory for finite-state Markov chains run at a
//! sped-up clock.
//!
//! The crate computes the exact invariants of an irreducible generator
//! (stationary law, ergodic projector, deviation and fundamental
//! matrices, limit covariances), simulates the sped-up chain pathwise,
//! evaluates its occupation functionals and martingales in closed form
//! per path, integrates bounded-variation integrands against them, and
//! wraps the lot in seeded Monte Carlo experiments that compare the
//! empirical laws with their Gaussian limits.
//!
//! Modules:
//!
//! * [`chain_algebra`]: generator validation and the exact matrix
//!   invariants with identity checks,
//! * [`path_sim`]: jump-chain simulation and exact pathwise functionals,
//! * [`stoch_integral`]: pathwise and limit integrals of piecewise
//!   affine integrands,
//! * [`bv_toolkit`]: scalar bounded-variation machinery and the
//!   inequality certificates,
//! * [`harness`]: Monte Carlo experiments, configs, and reports,
//! * [`streams`]: deterministic seed derivation and random streams.

pub mod bv_toolkit;
pub mod chain_algebra;
pub mod harness;
pub mod path_sim;
pub mod stoch_integral;
pub mod streams;
