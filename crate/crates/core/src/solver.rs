//! Weighted elastic-net and SCAD solvers.
//!
//! The convex criterion is
//!
//! ```text
//! ||y - X b||^2 + lambda2 ||b||^2 + lambda1 * sum_j w_j |b_j|
//! ```
//!
//! with no 1/2 factors, so the soft-threshold level of coordinate `j` is
//! `lambda1 * w_j / 2`. It is minimised by cyclic coordinate descent on the
//! Gram matrix `X'X`, alternating full sweeps with sweeps restricted to the
//! current nonzero coordinates. [`augmented_oracle_fit`] solves the same problem
//! by a different route and exists to cross-check the coordinate solver.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::data::{Dataset, FitResult, Penalty};
use crate::error::{validation, Error, Result};

/// SCAD shape parameter.
pub const SCAD_A: f64 = 3.7;

/// Largest number of free coordinates for which the oracle enumerates sign patterns.
pub const ORACLE_ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Stop once a full sweep moves no coefficient by more than this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Multiply the argmin by the elastic-net prefactor.
    pub rescale: bool,
    /// Record the criterion after every sweep in [`FitResult::trace`].
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-8, max_sweeps: 10_000, rescale: true, record_trace: false }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return validation(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_sweeps == 0 {
            return validation("max_sweeps must be at least 1");
        }
        Ok(())
    }
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimiser over `b` of `-2 z b + denom b^2 + 2 threshold |b|`, i.e. `S(z, threshold) / denom`.
pub fn coordinate_update(z: f64, denom: f64, threshold: f64) -> Result<f64> {
    if !(denom > 0.0) {
        return validation(format!("coordinate denominator must be positive, got {denom}"));
    }
    if !(threshold >= 0.0) {
        return validation(format!("threshold must be nonnegative, got {threshold}"));
    }
    Ok(soft_threshold(z, threshold) / denom)
}

/// Cached Gram system for repeated fits on one dataset (warm-started grids).
#[derive(Debug, Clone)]
pub struct CoordinateDescent<'a> {
    data: &'a Dataset,
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
}

/// Per-coordinate minimiser used inside a sweep.
trait CoordinateRule {
    /// New value of coordinate `j` given `z = x_j' r_{-j}` and `x_j' x_j`.
    fn update(&self, j: usize, z: f64, col_sq: f64) -> Result<f64>;
    /// Criterion value given the residual sum of squares and current coefficients.
    fn criterion(&self, rss: f64, beta: &[f64]) -> f64;
    fn frozen(&self, _j: usize) -> bool {
        false
    }
}

struct EnetRule<'p> {
    penalty: &'p Penalty,
}

impl CoordinateRule for EnetRule<'_> {
    fn update(&self, j: usize, z: f64, col_sq: f64) -> Result<f64> {
        let l1 = self.penalty.l1_strength(j);
        let denom = col_sq + self.penalty.lambda2();
        if denom <= 0.0 {
            // A zero column with a positive l1 weight just stays at zero.
            return if l1 > 0.0 { Ok(0.0) } else { Err(Error::DegenerateColumn { column: j }) };
        }
        coordinate_update(z, denom, l1 / 2.0)
    }

    fn criterion(&self, rss: f64, beta: &[f64]) -> f64 {
        let mut pen = 0.0;
        for (j, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                pen += self.penalty.lambda2() * b * b + self.penalty.l1_strength(j) * b.abs();
            }
        }
        rss + pen
    }

    fn frozen(&self, j: usize) -> bool {
        self.penalty.is_excluded(j)
    }
}

struct ScadRule {
    lambda: f64,
    n: f64,
}

impl CoordinateRule for ScadRule {
    fn update(&self, _j: usize, z: f64, col_sq: f64) -> Result<f64> {
        Ok(scad_threshold(z / self.n, col_sq / self.n, self.lambda))
    }

    fn criterion(&self, rss: f64, beta: &[f64]) -> f64 {
        rss + 2.0 * self.n * beta.iter().map(|b| scad_penalty(b.abs(), self.lambda)).sum::<f64>()
    }
}

impl<'a> CoordinateDescent<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let gram = data.x().tr_mul(data.x());
        let xty = data.x().tr_mul(data.y());
        let yty = data.y().norm_squared();
        CoordinateDescent { data, gram, xty, yty }
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Weighted elastic-net fit, optionally warm-started from `start` (raw scale).
    pub fn fit(&self, penalty: &Penalty, config: &SolverConfig, start: Option<&[f64]>) -> Result<FitResult> {
        config.validate()?;
        penalty.check_len(self.data.p())?;
        let rule = EnetRule { penalty };
        let (beta_raw, iterations, converged, trace) = self.run(&rule, config, start)?;
        let factor = if config.rescale { self.data.prefactor(penalty.lambda2()) } else { 1.0 };
        let objective = penalty.objective(self.data, &beta_raw);
        let kkt = kkt_check(self.data, penalty, &beta_raw)?;
        Ok(FitResult::assemble(beta_raw, factor, objective, iterations, converged, kkt, trace))
    }

    /// SCAD fit at `lambda`, optionally warm-started.
    pub fn fit_scad(&self, lambda: f64, config: &SolverConfig, start: Option<&[f64]>) -> Result<FitResult> {
        config.validate()?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return validation(format!("SCAD lambda must be finite and >= 0, got {lambda}"));
        }
        let rule = ScadRule { lambda, n: self.data.n() as f64 };
        let (beta, iterations, converged, trace) = self.run(&rule, config, start)?;
        let objective = rule.criterion(self.data.rss(&beta), &beta);
        let kkt = scad_stationarity(self.data, lambda, &beta)?;
        Ok(FitResult::assemble(beta, 1.0, objective, iterations, converged, kkt, trace))
    }

    fn run<R: CoordinateRule>(
        &self,
        rule: &R,
        config: &SolverConfig,
        start: Option<&[f64]>,
    ) -> Result<(Vec<f64>, usize, bool, Vec<f64>)> {
        let p = self.data.p();
        let mut beta = match start {
            Some(s) if s.len() == p => s.to_vec(),
            Some(s) => return validation(format!("warm start has length {} but p = {p}", s.len())),
            None => vec![0.0; p],
        };
        for (j, b) in beta.iter_mut().enumerate() {
            if rule.frozen(j) {
                *b = 0.0;
            }
        }
        // grad = X'y - X'X beta = X' r
        let mut grad = self.xty.clone();
        for (j, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                grad.axpy(-*b, &self.gram.column(j), 1.0);
            }
        }

        let mut trace = Vec::new();
        let mut sweeps = 0;
        let mut full_sweep = true;
        let mut converged = false;
        while sweeps < config.max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for j in 0..p {
                if rule.frozen(j) || (!full_sweep && beta[j] == 0.0) {
                    continue;
                }
                let col_sq = self.gram[(j, j)];
                let old = beta[j];
                let new = rule.update(j, grad[j] + col_sq * old, col_sq)?;
                if new != old {
                    let delta = new - old;
                    grad.axpy(-delta, &self.gram.column(j), 1.0);
                    beta[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if config.record_trace {
                trace.push(rule.criterion(self.rss_from_grad(&beta, &grad), &beta));
            }
            if max_change < config.tol {
                if full_sweep {
                    converged = true;
                    break;
                }
                full_sweep = true;
            } else {
                full_sweep = false;
            }
        }
        Ok((beta, sweeps, converged, trace))
    }

    // rss = y'y - 2 b'X'y + b'X'Xb = y'y - b'X'y - b'grad
    fn rss_from_grad(&self, beta: &[f64], grad: &DVector<f64>) -> f64 {
        let mut acc = self.yty;
        for (j, b) in beta.iter().enumerate() {
            if *b != 0.0 {
                acc -= b * (self.xty[j] + grad[j]);
            }
        }
        acc
    }
}

/// Weighted elastic-net fit from a cold start.
pub fn weighted_enet_fit(data: &Dataset, penalty: &Penalty, config: &SolverConfig) -> Result<FitResult> {
    CoordinateDescent::new(data).fit(penalty, config, None)
}

/// Largest violation of the first-order optimality conditions at `beta_raw`.
///
/// With `g_j = -2 x_j'(y - X b)`: a zero coordinate contributes
/// `max(0, |g_j| - lambda1 w_j)`, a nonzero one `|g_j + 2 lambda2 b_j + lambda1 w_j sign(b_j)|`.
/// Excluded coordinates (infinite weight) contribute nothing while they are zero.
pub fn kkt_check(data: &Dataset, penalty: &Penalty, beta_raw: &[f64]) -> Result<f64> {
    let p = data.p();
    penalty.check_len(p)?;
    if beta_raw.len() != p {
        return validation(format!("beta has length {} but p = {p}", beta_raw.len()));
    }
    if beta_raw.iter().any(|b| !b.is_finite()) {
        return validation("non-finite coefficient");
    }
    let r = data.residual(beta_raw);
    let xtr = data.x().tr_mul(&r);
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let g = -2.0 * xtr[j];
        let b = beta_raw[j];
        let v = if penalty.is_excluded(j) {
            if b == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            let l1 = penalty.lambda1() * penalty.weights()[j];
            if b == 0.0 {
                (g.abs() - l1).max(0.0)
            } else {
                (g + 2.0 * penalty.lambda2() * b + l1 * b.signum()).abs()
            }
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Solves the weighted elastic-net as a weighted lasso on augmented data.
///
/// The ridge term is absorbed by stacking `sqrt(lambda2) I_p` under `X` and
/// `p` zeros under `y`. The lasso is then solved by enumerating every sign
/// pattern when at most [`ORACLE_ENUMERATION_LIMIT`] coordinates are free, and
/// by an accelerated proximal-gradient loop otherwise.
pub fn augmented_oracle_fit(data: &Dataset, penalty: &Penalty) -> Result<FitResult> {
    let (n, p) = (data.n(), data.p());
    penalty.check_len(p)?;
    let root = penalty.lambda2().sqrt();
    let x_aug = DMatrix::from_fn(n + p, p, |i, j| {
        if i < n {
            data.x()[(i, j)]
        } else if i - n == j {
            root
        } else {
            0.0
        }
    });
    let y_aug = DVector::from_fn(n + p, |i, _| if i < n { data.y()[i] } else { 0.0 });

    let free: Vec<usize> = (0..p).filter(|&j| !penalty.is_excluded(j)).collect();
    for &j in &free {
        if x_aug.column(j).norm_squared() == 0.0 && penalty.lambda1() * penalty.weights()[j] == 0.0 {
            return Err(Error::DegenerateColumn { column: j });
        }
    }
    let xf = x_aug.select_columns(&free);
    let gram = xf.tr_mul(&xf);
    let c = xf.tr_mul(&y_aug);
    let l1: Vec<f64> = free.iter().map(|&j| penalty.lambda1() * penalty.weights()[j]).collect();

    let sub = if free.is_empty() {
        Vec::new()
    } else if free.len() <= ORACLE_ENUMERATION_LIMIT {
        enumerate_sign_patterns(&gram, &c, &l1)?
    } else {
        proximal_gradient(&gram, &c, &l1)
    };

    let mut beta_raw = vec![0.0; p];
    for (k, &j) in free.iter().enumerate() {
        beta_raw[j] = sub[k];
    }
    let objective = penalty.objective(data, &beta_raw);
    let kkt = kkt_check(data, penalty, &beta_raw)?;
    let factor = data.prefactor(penalty.lambda2());
    Ok(FitResult::assemble(beta_raw, factor, objective, 0, true, kkt, Vec::new()))
}

// Every sign pattern s in {-1, 0, 1}^k fixes a candidate through the
// stationarity equations on its nonzero set; the optimum is the consistent
// candidate with the smallest criterion.
fn enumerate_sign_patterns(gram: &DMatrix<f64>, c: &DVector<f64>, l1: &[f64]) -> Result<Vec<f64>> {
    let k = c.len();
    let scale = c.amax().max(1.0);
    let slack = 1e-9 * scale;
    let mut signs = vec![0i8; k];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(k as u32);
    for code in 0..total {
        let mut rem = code;
        for s in signs.iter_mut() {
            *s = (rem % 3) as i8 - 1;
            rem /= 3;
        }
        let active: Vec<usize> = (0..k).filter(|&j| signs[j] != 0).collect();
        let mut beta = vec![0.0; k];
        if !active.is_empty() {
            let g_aa = DMatrix::from_fn(active.len(), active.len(), |a, b| gram[(active[a], active[b])]);
            let rhs = DVector::from_fn(active.len(), |a, _| {
                let j = active[a];
                c[j] - 0.5 * l1[j] * f64::from(signs[j])
            });
            let Some(chol) = g_aa.cholesky() else { continue };
            let sol = chol.solve(&rhs);
            if active.iter().zip(sol.iter()).any(|(&j, v)| v * f64::from(signs[j]) <= 0.0) {
                continue;
            }
            for (a, &j) in active.iter().enumerate() {
                beta[j] = sol[a];
            }
        }
        let consistent = (0..k).filter(|&j| signs[j] == 0).all(|j| {
            let corr: f64 = c[j] - active.iter().map(|&a| gram[(j, a)] * beta[a]).sum::<f64>();
            2.0 * corr.abs() <= l1[j] + slack
        });
        if !consistent {
            continue;
        }
        let mut obj = 0.0;
        for a in 0..k {
            if beta[a] == 0.0 {
                continue;
            }
            let quad: f64 = (0..k).map(|b| gram[(a, b)] * beta[b]).sum();
            obj += beta[a] * quad - 2.0 * c[a] * beta[a] + l1[a] * beta[a].abs();
        }
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, beta));
        }
    }
    best.map(|(_, b)| b)
        .ok_or_else(|| Error::Validation("no consistent sign pattern (singular problem)".into()))
}

// FISTA with adaptive restart on the smooth part b'Gb - 2c'b; the step comes
// from a Gershgorin bound on the largest eigenvalue of 2G.
fn proximal_gradient(gram: &DMatrix<f64>, c: &DVector<f64>, l1: &[f64]) -> Vec<f64> {
    let k = c.len();
    let lipschitz = 2.0
        * (0..k)
            .map(|i| gram.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let step = 1.0 / lipschitz.max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(k);
    let mut z = x.clone();
    let mut t = 1.0_f64;
    for _ in 0..2_000_000 {
        let grad = 2.0 * (gram * &z - c);
        let mut next = &z - step * grad;
        for j in 0..k {
            next[j] = soft_threshold(next[j], step * l1[j]);
        }
        let change = (&next - &x).amax();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        // restart when the momentum direction opposes progress
        if (&z - &next).dot(&(&next - &x)) > 0.0 {
            t = 1.0;
            z = next.clone();
        } else {
            z = &next + momentum * (&next - &x);
            t = t_next;
        }
        x = next;
        if change < 1e-14 * x.amax().max(1.0) {
            break;
        }
    }
    x.iter().copied().collect()
}

/// SCAD penalty `p_lambda(t)` for `t >= 0` with shape [`SCAD_A`].
pub fn scad_penalty(t: f64, lambda: f64) -> f64 {
    let a = SCAD_A;
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * lambda * lambda / 2.0
    }
}

/// Derivative of the SCAD penalty for `t > 0`.
pub fn scad_derivative(t: f64, lambda: f64) -> f64 {
    let a = SCAD_A;
    if t <= lambda {
        lambda
    } else if t <= a * lambda {
        (a * lambda - t) / (a - 1.0)
    } else {
        0.0
    }
}

/// Global minimiser over `b` of `d b^2 - 2 u b + 2 p_lambda(|b|)`.
///
/// The criterion is quadratic on each of the three SCAD pieces, so the
/// minimiser is one of the clamped piecewise stationary points. For `d = 1`
/// this is the usual rule: zero for `|u| <= lambda`, soft-thresholding by
/// `lambda` up to `2 lambda`, a linear interpolation up to `a lambda`, and
/// `u` itself beyond.
pub fn scad_threshold(u: f64, d: f64, lambda: f64) -> f64 {
    if d <= 0.0 || u == 0.0 {
        return 0.0;
    }
    let a = SCAD_A;
    let m = u.abs();
    let h = |t: f64| d * t * t - 2.0 * m * t + 2.0 * scad_penalty(t, lambda);
    let mut candidates = [0.0; 5];
    candidates[1] = ((m - lambda) / d).clamp(0.0, lambda);
    let curvature = d - 1.0 / (a - 1.0);
    candidates[2] = if curvature > 0.0 {
        ((m - a * lambda / (a - 1.0)) / curvature).clamp(lambda, a * lambda)
    } else {
        lambda
    };
    candidates[3] = a * lambda;
    candidates[4] = (m / d).max(a * lambda);
    let mut best = 0.0;
    let mut best_val = 0.0;
    for &t in &candidates[1..] {
        let v = h(t);
        if v < best_val {
            best_val = v;
            best = t;
        }
    }
    best.copysign(u)
}

/// SCAD coordinate-descent fit from a cold start.
///
/// The criterion is `||y - X b||^2 / 2 + n * sum_j p_lambda(|b_j|)`. It is
/// nonconvex; the result is a coordinatewise minimum.
pub fn scad_fit(data: &Dataset, lambda: f64, config: &SolverConfig) -> Result<FitResult> {
    CoordinateDescent::new(data).fit_scad(lambda, config, None)
}

/// Largest stationarity violation of the SCAD criterion at `beta`.
pub fn scad_stationarity(data: &Dataset, lambda: f64, beta: &[f64]) -> Result<f64> {
    if beta.len() != data.p() {
        return validation(format!("beta has length {} but p = {}", beta.len(), data.p()));
    }
    let n = data.n() as f64;
    let xtr = data.x().tr_mul(&data.residual(beta));
    let worst = beta
        .iter()
        .zip(xtr.iter())
        .map(|(&b, &c)| {
            let g = -2.0 * c;
            if b == 0.0 {
                (g.abs() - 2.0 * n * lambda).max(0.0)
            } else {
                (g + 2.0 * n * scad_derivative(b.abs(), lambda) * b.signum()).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(worst)
}
