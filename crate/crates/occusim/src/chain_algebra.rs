//! Generator-matrix algebra for irreducible finite-state Markov chains.
//!
//! Given a validated generator `Q` this module computes, in closed form,
//! the stationary distribution `pi`, the ergodic projector `Pi = 1 pi^T`,
//! the fundamental matrix `F = (Pi - Q)^{-1}`, the deviation matrix
//! `D = F - Pi`, and the covariance matrices of the two Gaussian limits
//! attached to the occupation measure of the chain:
//!
//! ```text
//! SigmaY = -(Q^T diag(pi) + diag(pi) Q)
//! SigmaX =  diag(pi) D + D^T diag(pi)      ( = F^T SigmaY F )
//! ```
//!
//! State spaces are small by design, so every solve is a dense LU
//! factorization guarded by an explicit condition estimate. A residual
//! checker is provided for the defining identities
//! `QF = FQ = QD = DQ = Pi - I` and `pi^T D = 0`.

use nalgebra::{DMatrix, DVector};
use std::path::Path;
use thiserror::Error;

/// Hard ceiling on the condition estimate of any linear system solved here.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative eigenvalue floor for the positive-semidefiniteness check.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ChainAlgebraError {
    #[error("not a generator matrix: {0}")]
    NotAGenerator(String),
    #[error("generator is reducible: the positive-rate digraph is not strongly connected")]
    Reducible,
    #[error("{context}: system is numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { context: &'static str, condition: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse generator CSV: {0}")]
    Parse(String),
}

/// A validated irreducible generator matrix.
///
/// Off-diagonal entries are nonnegative jump rates. The diagonal is
/// recomputed on construction as minus the off-diagonal row sum, so the
/// stored rows sum to zero up to floating-point rounding no matter how
/// sloppy the input diagonal was (as long as it was within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: DMatrix<f64>,
}

impl GeneratorMatrix {
    /// Validate `raw` with row-sum tolerance `tol`.
    pub fn new(raw: DMatrix<f64>, tol: f64) -> Result<Self, ChainAlgebraError> {
        let d = raw.nrows();
        if d == 0 || raw.ncols() != d {
            return Err(ChainAlgebraError::NotAGenerator(format!(
                "expected a nonempty square matrix, got {}x{}",
                raw.nrows(),
                raw.ncols()
            )));
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(ChainAlgebraError::NotAGenerator("entries must be finite".into()));
        }
        for i in 0..d {
            for j in 0..d {
                if i != j && raw[(i, j)] < 0.0 {
                    return Err(ChainAlgebraError::NotAGenerator(format!(
                        "negative off-diagonal rate at ({i}, {j}): {}",
                        raw[(i, j)]
                    )));
                }
            }
        }
        let mut entries = raw;
        for i in 0..d {
            let off_sum: f64 = (0..d).filter(|&j| j != i).map(|j| entries[(i, j)]).sum();
            let row_sum = off_sum + entries[(i, i)];
            if row_sum.abs() > tol {
                return Err(ChainAlgebraError::NotAGenerator(format!(
                    "row {i} sums to {row_sum:.3e}, tolerance {tol:.3e}"
                )));
            }
            entries[(i, i)] = -off_sum;
        }
        if !strongly_connected(&entries) {
            return Err(ChainAlgebraError::Reducible);
        }
        Ok(Self { entries })
    }

    /// Validate with the default tolerance `1e-9 * max |raw_ij|`.
    pub fn with_default_tol(raw: DMatrix<f64>) -> Result<Self, ChainAlgebraError> {
        let tol = 1e-9 * raw.amax().max(f64::MIN_POSITIVE);
        Self::new(raw, tol)
    }

    /// Read and validate a generator from CSV (see [`read_generator_csv`]).
    pub fn from_csv(path: &Path) -> Result<Self, ChainAlgebraError> {
        Self::with_default_tol(read_generator_csv(path)?)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Exit rate of `state`, i.e. `-Q_ii`.
    pub fn exit_rate(&self, state: usize) -> f64 {
        -self.entries[(state, state)]
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim()).map(|i| self.exit_rate(i)).fold(0.0, f64::max)
    }
}

/// Strong connectivity of the digraph with an edge wherever `Q_ij > 0`,
/// checked by one forward and one backward traversal from state 0.
fn strongly_connected(q: &DMatrix<f64>) -> bool {
    let d = q.nrows();
    let reaches_all = |transposed: bool| {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..d {
                let rate = if transposed { q[(j, i)] } else { q[(i, j)] };
                if j != i && rate > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reaches_all(false) && reaches_all(true)
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn guard_condition(m: &DMatrix<f64>, context: &'static str) -> Result<(), ChainAlgebraError> {
    let condition = condition_estimate(m);
    if condition > CONDITION_LIMIT {
        return Err(ChainAlgebraError::SingularSystem { context, condition });
    }
    Ok(())
}

/// Stationary distribution: the unique probability vector with `pi^T Q = 0`.
///
/// Solves the bordered system obtained from `Q^T` by replacing its last row
/// with the normalization constraint. For an irreducible generator that
/// system is nonsingular, because any `d - 1` columns of `Q` are linearly
/// independent.
pub fn stationary(q: &GeneratorMatrix) -> Result<DVector<f64>, ChainAlgebraError> {
    let d = q.dim();
    let mut m = q.entries().transpose();
    for j in 0..d {
        m[(d - 1, j)] = 1.0;
    }
    guard_condition(&m, "stationary distribution")?;
    let mut b = DVector::zeros(d);
    b[d - 1] = 1.0;
    let x = m.lu().solve(&b).ok_or(ChainAlgebraError::SingularSystem {
        context: "stationary distribution",
        condition: f64::INFINITY,
    })?;
    let total: f64 = x.iter().sum();
    let pi = x / total;
    if pi.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
        return Err(ChainAlgebraError::SingularSystem {
            context: "stationary distribution (nonpositive component)",
            condition: condition_estimate(&q.entries().transpose()),
        });
    }
    Ok(pi)
}

/// Deviation matrix, fundamental matrix, and ergodic projector, in that
/// order: `F = (Pi - Q)^{-1}`, `D = F - Pi`, `Pi = 1 pi^T`.
pub fn deviation_matrix(
    q: &GeneratorMatrix,
    pi: &DVector<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>), ChainAlgebraError> {
    let d = q.dim();
    let ergodic = DVector::from_element(d, 1.0) * pi.transpose();
    let a = &ergodic - q.entries();
    guard_condition(&a, "fundamental matrix")?;
    let fundamental = a.lu().try_inverse().ok_or(ChainAlgebraError::SingularSystem {
        context: "fundamental matrix",
        condition: f64::INFINITY,
    })?;
    let deviation = &fundamental - &ergodic;
    Ok((deviation, fundamental, ergodic))
}

fn check_psd(m: &DMatrix<f64>) -> Result<(), ChainAlgebraError> {
    let sym = (m + m.transpose()) * 0.5;
    let eigen = nalgebra::SymmetricEigen::new(sym).eigenvalues;
    let max = eigen.iter().cloned().fold(0.0_f64, f64::max);
    let min = eigen.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * max.max(f64::MIN_POSITIVE) {
        return Err(ChainAlgebraError::NotPsd { min_eigenvalue: min });
    }
    Ok(())
}

/// Covariance matrices of the two Gaussian limits, `(SigmaY, SigmaX)`.
///
/// `SigmaY` scales the compensated-indicator limit, `SigmaX` the centered
/// occupation-measure limit. Both are symmetric by construction, must be
/// positive semidefinite, and annihilate the all-ones vector.
pub fn limit_covariances(
    q: &GeneratorMatrix,
    pi: &DVector<f64>,
    deviation: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), ChainAlgebraError> {
    let diag_pi = DMatrix::from_diagonal(pi);
    let sigma_y = -(q.entries().transpose() * &diag_pi + &diag_pi * q.entries());
    let sigma_x = &diag_pi * deviation + deviation.transpose() * &diag_pi;
    check_psd(&sigma_y)?;
    check_psd(&sigma_x)?;
    Ok((sigma_y, sigma_x))
}

/// Everything derived from a single generator, computed once and reused.
#[derive(Debug, Clone)]
pub struct ChainInvariants {
    pub pi: DVector<f64>,
    pub ergodic: DMatrix<f64>,
    pub deviation: DMatrix<f64>,
    pub fundamental: DMatrix<f64>,
    pub sigma_y: DMatrix<f64>,
    pub sigma_x: DMatrix<f64>,
}

impl ChainInvariants {
    pub fn compute(q: &GeneratorMatrix) -> Result<Self, ChainAlgebraError> {
        let pi = stationary(q)?;
        let (deviation, fundamental, ergodic) = deviation_matrix(q, &pi)?;
        let (sigma_y, sigma_x) = limit_covariances(q, &pi, &deviation)?;
        Ok(Self { pi, ergodic, deviation, fundamental, sigma_y, sigma_x })
    }
}

/// One residual of the identity checker.
#[derive(Debug, Clone)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub absolute: f64,
    pub relative: f64,
    pub pass: bool,
}

/// Residual report for the defining identities of `D` and `F`.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub residuals: Vec<IdentityResidual>,
    /// Common scale `max|Q| * max(1, max|F|)^2` used for relative residuals.
    pub scale: f64,
    pub tol: f64,
}

impl IdentityReport {
    pub fn max_relative(&self) -> f64 {
        self.residuals.iter().map(|r| r.relative).fold(0.0, f64::max)
    }

    pub fn all_pass(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }
}

/// Check all defining identities at relative tolerance `tol` and report
/// each residual. Covered: the four forms of `QF = FQ = QD = DQ = Pi - I`,
/// the orthogonality `pi^T D = 0`, the covariance identity
/// `F^T (Q^T diag(pi) + diag(pi) Q) F = -(diag(pi) D + D^T diag(pi))`, and
/// the transfer `F^T SigmaY F = SigmaX`.
pub fn verify_identities(q: &GeneratorMatrix, inv: &ChainInvariants, tol: f64) -> IdentityReport {
    let d = q.dim();
    let qm = q.entries();
    let eye = DMatrix::<f64>::identity(d, d);
    let target = &inv.ergodic - &eye;
    let diag_pi = DMatrix::from_diagonal(&inv.pi);
    let dirichlet = qm.transpose() * &diag_pi + &diag_pi * qm;

    let scale = qm.amax() * inv.fundamental.amax().max(1.0).powi(2);
    let mut residuals = Vec::new();
    let mut push = |name: &'static str, m: DMatrix<f64>| {
        let absolute = m.amax();
        let relative = absolute / scale;
        residuals.push(IdentityResidual { name, absolute, relative, pass: relative <= tol });
    };

    push("qf_minus_pi_minus_i", qm * &inv.fundamental - &target);
    push("fq_minus_pi_minus_i", &inv.fundamental * qm - &target);
    push("qd_minus_pi_minus_i", qm * &inv.deviation - &target);
    push("dq_minus_pi_minus_i", &inv.deviation * qm - &target);
    push("pi_t_d", DMatrix::from_rows(&[inv.pi.transpose() * &inv.deviation]));
    push(
        "covariance_identity",
        inv.fundamental.transpose() * &dirichlet * &inv.fundamental
            + (&diag_pi * &inv.deviation + inv.deviation.transpose() * &diag_pi),
    );
    push(
        "sigma_transfer",
        inv.fundamental.transpose() * &inv.sigma_y * &inv.fundamental - &inv.sigma_x,
    );

    IdentityReport { residuals, scale, tol }
}

/// Parse a headerless CSV of `d` rows with `d` comma-separated decimals.
pub fn read_generator_csv(path: &Path) -> Result<DMatrix<f64>, ChainAlgebraError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|e| {
                    ChainAlgebraError::Parse(format!("line {}: {:?}: {e}", lineno + 1, cell.trim()))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    let d = rows.len();
    if d == 0 {
        return Err(ChainAlgebraError::Parse("empty file".into()));
    }
    if rows.iter().any(|r| r.len() != d) {
        return Err(ChainAlgebraError::Parse(format!(
            "expected {d} columns in each of the {d} rows"
        )));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Write a matrix in the same headerless CSV format at 17 significant
/// digits, enough for an exact round trip through [`read_generator_csv`].
pub fn write_generator_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), ChainAlgebraError> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
