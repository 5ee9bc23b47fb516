//! JSON experiment configuration shared by all harness subcommands.
//!
//! Required keys: `generator` (inline row matrix or `{"csv": path}`),
//! `alpha`, `n_grid`, `horizon`, `replications`, `master_seed`. Optional:
//! `epsilon` (defaults to `alpha / 4`), `init` (`"stationary"` or a
//! 1-based state index), `integrands`, `test_level` (defaults to 0.01).
//! Unknown keys are rejected rather than silently ignored.

use super::HarnessError;
use crate::chain_algebra::GeneratorMatrix;
use crate::path_sim::PathInit;
use crate::stoch_integral::PiecewiseFunction;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSource,
    pub alpha: f64,
    pub n_grid: Vec<u64>,
    pub horizon: f64,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub integrands: Vec<IntegrandSpec>,
    #[serde(default)]
    pub test_level: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSource {
    Inline(Vec<Vec<f64>>),
    Csv(CsvSource),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub csv: PathBuf,
}

/// Initial condition: the string `"stationary"` or a 1-based state label.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    State(u32),
    Named(String),
}

impl InitSpec {
    pub fn to_path_init(&self, pi: &DVector<f64>) -> Result<PathInit, HarnessError> {
        match self {
            InitSpec::Named(name) if name == "stationary" => {
                Ok(PathInit::Distribution(pi.clone()))
            }
            InitSpec::Named(name) => Err(HarnessError::InvalidConfig(format!(
                "unknown init \"{name}\"; use \"stationary\" or a 1-based state index"
            ))),
            InitSpec::State(label) => {
                let label = *label as usize;
                if label == 0 || label > pi.len() {
                    return Err(HarnessError::InvalidConfig(format!(
                        "init state {label} out of range 1..={}",
                        pi.len()
                    )));
                }
                Ok(PathInit::Fixed(label - 1))
            }
        }
    }
}

/// A piecewise-affine integrand, one `a + t b` pair per segment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub breakpoints: Vec<f64>,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl IntegrandSpec {
    pub fn to_piecewise(&self, dim: usize) -> Result<PiecewiseFunction, HarnessError> {
        let mut offsets = Vec::with_capacity(self.segments.len());
        let mut slopes = Vec::with_capacity(self.segments.len());
        for segment in &self.segments {
            offsets.push(matrix_from_rows(&segment.a)?);
            slopes.push(matrix_from_rows(&segment.b)?);
        }
        if let Some(first) = offsets.first() {
            if first.ncols() != dim {
                return Err(HarnessError::InvalidConfig(format!(
                    "integrand has {} columns, generator has {dim} states",
                    first.ncols()
                )));
            }
        }
        Ok(PiecewiseFunction::new(self.breakpoints.clone(), offsets, slopes)?)
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, HarnessError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(HarnessError::InvalidConfig("matrix must be nonempty".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(HarnessError::InvalidConfig("matrix rows differ in length".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.n_grid.is_empty() {
            return fail("n_grid must not be empty".into());
        }
        if self.n_grid[0] == 0 {
            return fail("n_grid entries must be at least 1".into());
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("n_grid must increase strictly".into());
        }
        if self.replications < 100 {
            return fail(format!(
                "at least 100 replications are needed for stable statistics, got {}",
                self.replications
            ));
        }
        let epsilon = self.resolved_epsilon();
        if !(epsilon > 0.0 && epsilon < self.alpha / 2.0) {
            return fail(format!(
                "epsilon must lie strictly between 0 and alpha/2, got {epsilon}"
            ));
        }
        let level = self.resolved_test_level();
        if !(level > 0.0 && level < 1.0) {
            return fail(format!("test_level must lie strictly between 0 and 1, got {level}"));
        }
        Ok(())
    }

    pub fn resolved_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.25 * self.alpha)
    }

    pub fn resolved_test_level(&self) -> f64 {
        self.test_level.unwrap_or(0.01)
    }

    /// Build the generator; a csv path is taken relative to `base_dir`.
    pub fn resolve_generator(&self, base_dir: &Path) -> Result<GeneratorMatrix, HarnessError> {
        match &self.generator {
            GeneratorSource::Inline(rows) => {
                Ok(GeneratorMatrix::with_default_tol(matrix_from_rows(rows)?)?)
            }
            GeneratorSource::Csv(source) => {
                let path = if source.csv.is_absolute() {
                    source.csv.clone()
                } else {
                    base_dir.join(&source.csv)
                };
                Ok(GeneratorMatrix::from_csv(&path)?)
            }
        }
    }

    pub fn resolve_init(
        &self,
        pi: &DVector<f64>,
        default: PathInit,
    ) -> Result<PathInit, HarnessError> {
        match &self.init {
            Some(spec) => spec.to_path_init(pi),
            None => Ok(default),
        }
    }

    /// Integrands checked against the generator dimension; each domain
    /// must cover the experiment horizon.
    pub fn resolve_integrands(&self, dim: usize) -> Result<Vec<PiecewiseFunction>, HarnessError> {
        let hs: Vec<PiecewiseFunction> = self
            .integrands
            .iter()
            .map(|spec| spec.to_piecewise(dim))
            .collect::<Result<_, _>>()?;
        for h in &hs {
            if h.horizon() < self.horizon {
                return Err(HarnessError::InvalidConfig(format!(
                    "integrand domain ends at {} but the horizon is {}",
                    h.horizon(),
                    self.horizon
                )));
            }
        }
        Ok(hs)
    }
}
