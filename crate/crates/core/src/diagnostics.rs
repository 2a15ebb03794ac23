//! Computable checks of the theory: eigenvalue bounds of the scaled Gram
//! matrix, the nonasymptotic risk bound of the elastic-net family, and the
//! standardized statistic whose limit is `N(0, sigma^2)` under the oracle
//! property.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::data::{support_of, Dataset};
use crate::error::{validation, Error, Result};

/// Relative change of the Rayleigh quotient at which power iteration stops.
pub const EIGEN_TOL: f64 = 1e-8;
const MAX_POWER_ITERATIONS: usize = 200_000;

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with Rayleigh quotients.
fn power_iteration(m: &DMatrix<f64>) -> f64 {
    let p = m.nrows();
    // fixed, irregular start so no eigenvector is missed by symmetry
    let mut v = DVector::from_fn(p, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract());
    v.normalize_mut();
    let mut value = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let w = m * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - value).abs() <= EIGEN_TOL * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        value = next;
    }
    value
}

/// Extreme eigenvalues `(b, B)` of `X'X / n`.
///
/// `B` comes from power iteration on the Gram matrix and `b = B - mu`, where
/// `mu` is the top eigenvalue of `B I - X'X / n`. With `p > n` the Gram
/// matrix is singular and `b = 0`.
pub fn eigen_bounds(x: &DMatrix<f64>) -> Result<(f64, f64)> {
    if x.iter().any(|v| !v.is_finite()) {
        return validation("design contains non-finite entries");
    }
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return validation("empty design");
    }
    let gram = x.tr_mul(x) / n as f64;
    let big = power_iteration(&gram);
    if p > n {
        return Ok((0.0, big));
    }
    let shifted = DMatrix::identity(p, p) * big - &gram;
    let small = (big - power_iteration(&shifted)).clamp(0.0, big);
    Ok((small, big))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionsReport {
    /// Smallest eigenvalue of `X'X / n`.
    pub b: f64,
    /// Largest eigenvalue of `X'X / n`.
    pub big_b: f64,
    /// `log(p) / log(n)`.
    pub nu_hat: f64,
    pub a1_holds: bool,
    /// Smallest nonzero `|beta*_j|`; `None` when `beta*` is zero.
    pub eta: Option<f64>,
    /// `max_i sum_j x_ij^2 / n`, reported without a threshold.
    pub max_row_norm_ratio: f64,
}

impl ConditionsReport {
    pub fn new(data: &Dataset, beta_star: &[f64]) -> Result<Self> {
        if beta_star.len() != data.p() {
            return validation(format!("beta* has length {} but p = {}", beta_star.len(), data.p()));
        }
        let (b, big_b) = eigen_bounds(data.x())?;
        let n = data.n() as f64;
        let eta = beta_star.iter().filter(|v| **v != 0.0).map(|v| v.abs()).reduce(f64::min);
        let max_row_norm_ratio = data.x().row_iter().map(|r| r.norm_squared()).fold(0.0, f64::max) / n;
        Ok(ConditionsReport {
            b,
            big_b,
            nu_hat: (data.p() as f64).ln() / n.ln(),
            a1_holds: b > 0.0,
            eta,
            max_row_norm_ratio,
        })
    }
}

/// Inputs of [`risk_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskBoundInputs {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `sum_j w_j^2`; equals `p` for unit weights.
    pub weights_sq_sum: f64,
    pub beta_star_norm_sq: f64,
    pub b: f64,
    pub big_b: f64,
    pub p: usize,
    pub n: usize,
    pub sigma: f64,
}

/// `4 (lambda2^2 ||b*||^2 + B p n sigma^2 + lambda1^2 sum w^2) / (b n + lambda2)^2`,
/// an upper bound on `E ||b_hat - b*||^2` for the naive weighted elastic-net.
pub fn risk_bound(inputs: &RiskBoundInputs) -> Result<f64> {
    let RiskBoundInputs { lambda1, lambda2, weights_sq_sum, beta_star_norm_sq, b, big_b, p, n, sigma } = *inputs;
    let reals = [lambda1, lambda2, weights_sq_sum, beta_star_norm_sq, b, big_b, sigma];
    if reals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain("risk bound inputs must be finite and nonnegative".into()));
    }
    let (p, n) = (p as f64, n as f64);
    let denom = (b * n + lambda2).powi(2);
    if denom == 0.0 {
        return Err(Error::Domain("risk bound needs b > 0 or lambda2 > 0".into()));
    }
    let numer = lambda2 * lambda2 * beta_star_norm_sq + big_b * p * n * sigma * sigma + lambda1 * lambda1 * weights_sq_sum;
    Ok(4.0 * numer / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityStat {
    pub value: f64,
    /// Whether the estimate is nonzero on every true nonzero coordinate.
    pub support_covered: bool,
}

/// `z = alpha' (I + lambda2 S^-1) S^(1/2) (b_hat - b*)_A / c` with
/// `S = X_A' X_A`, `A` the support of `beta_star` and `c` the data's
/// prefactor at `lambda2`.
///
/// `alpha` has one entry per element of `A` and unit norm. The square root
/// is the symmetric positive-definite root.
pub fn normality_stat(
    data: &Dataset,
    beta_hat: &[f64],
    beta_star: &[f64],
    alpha: &[f64],
    lambda2: f64,
) -> Result<NormalityStat> {
    let p = data.p();
    if beta_hat.len() != p || beta_star.len() != p {
        return validation(format!("coefficient vectors must have length p = {p}"));
    }
    if !(lambda2 >= 0.0 && lambda2.is_finite()) {
        return Err(Error::Domain(format!("lambda2 must be finite and >= 0, got {lambda2}")));
    }
    let support = support_of(beta_star);
    if support.is_empty() {
        return validation("beta* has no nonzero coordinates");
    }
    if alpha.len() != support.len() {
        return validation(format!("alpha has length {} but the support has {}", alpha.len(), support.len()));
    }
    let alpha_norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (alpha_norm - 1.0).abs() > 1e-8 {
        return validation(format!("alpha must have unit norm, got {alpha_norm}"));
    }
    let xa = data.x().select_columns(&support);
    let eig = SymmetricEigen::new(xa.tr_mul(&xa));
    let top = eig.eigenvalues.max();
    if !(eig.eigenvalues.min() > 1e-12 * top.max(1.0)) {
        return Err(Error::Domain("X_A' X_A is singular".into()));
    }
    let scale = data.prefactor(lambda2);
    let diag = eig.eigenvalues.map(|l| (1.0 + lambda2 / l) * l.sqrt() / scale);
    let v = &eig.eigenvectors;
    let dev = DVector::from_iterator(support.len(), support.iter().map(|&j| beta_hat[j] - beta_star[j]));
    let alpha = DVector::from_column_slice(alpha);
    let value = (v.tr_mul(&alpha)).component_mul(&diag).dot(&v.tr_mul(&dev));
    Ok(NormalityStat { value, support_covered: support.iter().all(|&j| beta_hat[j] != 0.0) })
}
