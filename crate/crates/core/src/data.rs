//! Shared data model: datasets, penalties, fit results and simulation scenarios.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{validation, Error, Result};

const CENTERED_TOL: f64 = 1e-10;

/// Response vector and dense design matrix for a no-intercept linear model.
///
/// Column `j` of `x` is predictor `x_j`. Construction rejects non-finite
/// entries and shape mismatches, so every `Dataset` in circulation is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    centered: bool,
    unit_norm: bool,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 {
            return validation(format!("need at least 2 observations, got {n}"));
        }
        if p < 1 {
            return validation("need at least 1 predictor");
        }
        if y.len() != n {
            return validation(format!("y has length {} but X has {n} rows", y.len()));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return validation(format!("non-finite response at row {i}"));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return validation(format!("non-finite predictor at row {}, column {}", k % n, k / n));
        }
        let centered = y.mean().abs() <= CENTERED_TOL
            && x.column_iter().all(|c| c.mean().abs() <= CENTERED_TOL);
        Ok(Dataset { x, y, centered, unit_norm: false })
    }

    pub fn from_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return validation("ragged predictor rows");
        }
        let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Dataset::new(x, DVector::from_column_slice(y))
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// True when columns have been rescaled to unit L2 norm by [`Dataset::standardize`].
    pub fn is_unit_norm(&self) -> bool {
        self.unit_norm
    }

    /// Subtracts column means from `X` and the mean from `y`.
    pub fn center(&self) -> Dataset {
        let mut x = self.x.clone();
        for mut col in x.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        let my = self.y.mean();
        let y = self.y.add_scalar(-my);
        Dataset { x, y, centered: true, unit_norm: self.unit_norm }
    }

    /// Rescales every column to unit L2 norm and returns the original norms.
    ///
    /// The elastic-net prefactor switches from `1 + lambda2 / n` to `1 + lambda2`
    /// on a unit-norm dataset. Coefficients on the original scale are
    /// `beta_j / norms[j]`.
    pub fn standardize(&self) -> Result<(Dataset, Vec<f64>)> {
        let norms: Vec<f64> = self.x.column_iter().map(|c| c.norm()).collect();
        if let Some(j) = norms.iter().position(|&s| s == 0.0) {
            return Err(Error::DegenerateColumn { column: j });
        }
        let mut x = self.x.clone();
        for (mut col, s) in x.column_iter_mut().zip(&norms) {
            col /= *s;
        }
        let data = Dataset { x, y: self.y.clone(), centered: self.centered, unit_norm: true };
        Ok((data, norms))
    }

    /// Dataset restricted to the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if columns.is_empty() {
            return validation("cannot select zero columns");
        }
        if let Some(&j) = columns.iter().find(|&&j| j >= self.p()) {
            return validation(format!("column {j} out of range for p = {}", self.p()));
        }
        let x = self.x.select_columns(columns);
        Ok(Dataset { x, y: self.y.clone(), centered: self.centered, unit_norm: self.unit_norm })
    }

    /// Same design, different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Dataset> {
        let mut d = Dataset::new(self.x.clone(), y)?;
        d.unit_norm = self.unit_norm;
        Ok(d)
    }

    /// Rescaling factor applied to the raw elastic-net argmin.
    pub fn prefactor(&self, lambda2: f64) -> f64 {
        if self.unit_norm {
            1.0 + lambda2
        } else {
            1.0 + lambda2 / self.n() as f64
        }
    }

    pub fn residual(&self, beta: &[f64]) -> DVector<f64> {
        let b = DVector::from_column_slice(beta);
        &self.y - &self.x * b
    }

    pub fn rss(&self, beta: &[f64]) -> f64 {
        self.residual(beta).norm_squared()
    }

    /// `max_j |x_j' y|`, the scale used to normalise KKT residuals.
    pub fn max_abs_xty(&self) -> f64 {
        self.x.tr_mul(&self.y).amax()
    }
}

/// The pair `(lambda1, lambda2)` with per-coefficient l1 weights.
///
/// A weight of `+inf` removes the coefficient from the problem: it is held at
/// exactly zero by every solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Penalty {
    lambda1: f64,
    lambda2: f64,
    weights: Vec<f64>,
}

impl Penalty {
    pub fn new(lambda1: f64, lambda2: f64, weights: Vec<f64>) -> Result<Self> {
        if !(lambda1 >= 0.0 && lambda1.is_finite()) {
            return validation(format!("lambda1 must be finite and >= 0, got {lambda1}"));
        }
        if !(lambda2 >= 0.0 && lambda2.is_finite()) {
            return validation(format!("lambda2 must be finite and >= 0, got {lambda2}"));
        }
        if let Some(j) = weights.iter().position(|w| !(*w >= 0.0)) {
            return validation(format!("weight {j} must be >= 0, got {}", weights[j]));
        }
        Ok(Penalty { lambda1, lambda2, weights })
    }

    /// Plain elastic-net penalty (all weights one).
    pub fn unit(lambda1: f64, lambda2: f64, p: usize) -> Result<Self> {
        Penalty::new(lambda1, lambda2, vec![1.0; p])
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_excluded(&self, j: usize) -> bool {
        self.weights[j].is_infinite()
    }

    /// Per-coordinate l1 strength `lambda1 * w_j` (0 for excluded coordinates, which never move).
    pub(crate) fn l1_strength(&self, j: usize) -> f64 {
        if self.is_excluded(j) {
            0.0
        } else {
            self.lambda1 * self.weights[j]
        }
    }

    pub(crate) fn check_len(&self, p: usize) -> Result<()> {
        if self.weights.len() != p {
            return validation(format!("penalty has {} weights but p = {p}", self.weights.len()));
        }
        Ok(())
    }

    /// `||y - X b||^2 + lambda2 ||b||^2 + lambda1 sum_j w_j |b_j|`.
    pub fn objective(&self, data: &Dataset, beta_raw: &[f64]) -> f64 {
        let ridge: f64 = beta_raw.iter().map(|b| b * b).sum();
        let l1: f64 = beta_raw
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, b)| self.lambda1 * self.weights[j] * b.abs())
            .sum();
        data.rss(beta_raw) + self.lambda2 * ridge + l1
    }
}

/// Output of any single fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Final estimate, after the elastic-net prefactor when rescaling is on.
    pub beta: Vec<f64>,
    /// Argmin of the penalised criterion before rescaling.
    pub beta_raw: Vec<f64>,
    pub active_set: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest KKT (or stationarity, for SCAD) violation at `beta_raw`.
    pub kkt_residual: f64,
    /// Criterion value after each sweep, when requested in the solver config.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl FitResult {
    pub(crate) fn assemble(
        beta_raw: Vec<f64>,
        factor: f64,
        objective: f64,
        iterations: usize,
        converged: bool,
        kkt_residual: f64,
        trace: Vec<f64>,
    ) -> Self {
        let beta: Vec<f64> = beta_raw.iter().map(|b| b * factor).collect();
        let active_set = support_of(&beta);
        FitResult { beta, beta_raw, active_set, objective, iterations, converged, kkt_residual, trace }
    }

    /// KKT residual divided by `max(1, ||X'y||_inf)`.
    pub fn scaled_kkt(&self, data: &Dataset) -> f64 {
        self.kkt_residual / data.max_abs_xty().max(1.0)
    }

    /// Expands a fit on a column subset back to length `p`, zeros elsewhere.
    pub fn scatter(&self, columns: &[usize], p: usize) -> FitResult {
        let mut beta = vec![0.0; p];
        let mut beta_raw = vec![0.0; p];
        for (k, &j) in columns.iter().enumerate() {
            beta[j] = self.beta[k];
            beta_raw[j] = self.beta_raw[k];
        }
        let active_set = support_of(&beta);
        FitResult { beta, beta_raw, active_set, trace: Vec::new(), ..self.clone() }
    }
}

/// Sorted indices of nonzero entries.
pub fn support_of(beta: &[f64]) -> Vec<usize> {
    beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect()
}

/// Predictor law of a simulation design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Design {
    /// Gaussian rows with `Cov(x_j, x_k) = rho^|j-k|`.
    Ar1,
    /// Independent standard normal predictors.
    Independent,
}

/// How the true coefficients are obtained for each replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoefficientLaw {
    /// `beta_star` is used unchanged in every replication.
    Fixed,
    /// Each support coefficient is redrawn per replication as
    /// `(-1)^u (a_n + |z|)` with `u ~ Bernoulli(prob_negative)`, `z ~ N(0, 1)`.
    RandomSigned { a_n: f64, prob_negative: f64 },
}

/// Full generative description of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    pub sigma: f64,
    /// True coefficients. Under [`CoefficientLaw::RandomSigned`] this holds
    /// `a_n` on the support, the smallest magnitude the law can produce.
    pub beta_star: Vec<f64>,
    pub support: Vec<usize>,
    pub gamma: f64,
    pub nu: f64,
    pub seed: u64,
    pub replications: usize,
    pub design: Design,
    pub coefficients: CoefficientLaw,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::Domain(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Domain(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.beta_star.len() != self.p {
            return validation("beta_star length differs from p");
        }
        if support_of(&self.beta_star) != self.support {
            return validation("support is inconsistent with beta_star");
        }
        if !(0.0..1.0).contains(&self.nu) {
            return Err(Error::Domain(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.gamma > 2.0 * self.nu / (1.0 - self.nu)) {
            return Err(Error::Domain(format!(
                "gamma = {} does not exceed 2 nu / (1 - nu) = {}",
                self.gamma,
                2.0 * self.nu / (1.0 - self.nu)
            )));
        }
        Ok(())
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}
