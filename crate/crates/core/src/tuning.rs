//! BIC selection of tuning parameters over a grid.
//!
//! `BIC = n log(RSS / n) + df log(n)` with `df` the number of nonzero
//! coefficients and `RSS` evaluated at the final (rescaled) estimate. The
//! minimiser over the grid wins; exact ties go to the larger `lambda1`, then
//! the larger `lambda2`.
//!
//! The adaptive elastic-net is tuned in two stages that share one `lambda2`;
//! see [`Lambda2Selection`](crate::adaptive::Lambda2Selection).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::adaptive::{second_stage, AdaptiveConfig, Lambda2Selection};
use crate::data::{Dataset, FitResult, Penalty};
use crate::error::{validation, Error, Result};
use crate::solver::{CoordinateDescent, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Lasso,
    Enet,
    AdaptiveLasso,
    AdaptiveEnet,
    Scad,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Lasso, Method::AdaptiveLasso, Method::Enet, Method::AdaptiveEnet, Method::Scad];

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Lasso => "Lasso",
            Method::Enet => "Enet",
            Method::AdaptiveLasso => "ALasso",
            Method::AdaptiveEnet => "AEnet",
            Method::Scad => "SCAD",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Method::AdaptiveLasso | Method::AdaptiveEnet)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" => Ok(Method::Lasso),
            "enet" => Ok(Method::Enet),
            "alasso" => Ok(Method::AdaptiveLasso),
            "aenet" => Ok(Method::AdaptiveEnet),
            "scad" => Ok(Method::Scad),
            other => validation(format!("unknown method '{other}'")),
        }
    }
}

/// The l1 levels of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Lambda1Values {
    /// `count` log-spaced values from the smallest level that zeroes every
    /// coefficient down to that level times `min_ratio`. For SCAD the same
    /// construction is used on the SCAD scale (`||X'y||_inf / n`).
    Auto { count: usize, min_ratio: f64 },
    /// Fixed values, used as given (sorted descending).
    Explicit(Vec<f64>),
}

impl Lambda1Values {
    /// Descending levels for a weighted problem on `data`.
    pub fn levels(&self, data: &Dataset, weights: &[f64]) -> Vec<f64> {
        match self {
            Lambda1Values::Explicit(v) => descending(v.clone()),
            Lambda1Values::Auto { count, min_ratio } => {
                let xty = data.x().tr_mul(data.y());
                let top = xty
                    .iter()
                    .zip(weights)
                    .filter(|(_, w)| w.is_finite() && **w > 0.0)
                    .map(|(c, w)| 2.0 * c.abs() / w)
                    .fold(0.0, f64::max);
                log_spaced(top, *count, *min_ratio)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Lambda1Values::Auto { count, min_ratio } => {
                if *count == 0 {
                    return validation("empty lambda1 grid");
                }
                if !(*min_ratio > 0.0 && *min_ratio < 1.0) {
                    return validation(format!("min_ratio must lie in (0, 1), got {min_ratio}"));
                }
            }
            Lambda1Values::Explicit(v) => {
                if v.is_empty() {
                    return validation("empty lambda1 grid");
                }
                if v.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                    return validation("lambda1 values must be finite and nonnegative");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    /// Levels of the unweighted fits (lasso, elastic-net, adaptive stage one).
    pub lambda1: Lambda1Values,
    /// Stage-two levels of the adaptive methods. Adaptive weights spread over
    /// many orders of magnitude, so the automatic range is much deeper.
    pub lambda1_star: Lambda1Values,
    pub lambda2_values: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lambda1: Lambda1Values::Auto { count: 50, min_ratio: 1e-2 },
            lambda1_star: Lambda1Values::Auto { count: 50, min_ratio: 1e-6 },
            lambda2_values: vec![0.0, 0.01, 0.1, 1.0, 10.0, 100.0],
        }
    }
}

impl Grid {
    /// One `(lambda1, lambda2)` point; adaptive stage two also uses `lambda1`.
    pub fn single(lambda1: f64, lambda2: f64) -> Self {
        Grid {
            lambda1: Lambda1Values::Explicit(vec![lambda1]),
            lambda1_star: Lambda1Values::Explicit(vec![lambda1]),
            lambda2_values: vec![lambda2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda2_values.is_empty() {
            return validation("empty lambda2 grid");
        }
        if self.lambda2_values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return validation("lambda2 values must be finite and nonnegative");
        }
        self.lambda1.validate()?;
        self.lambda1_star.validate()
    }

    /// Descending unweighted l1 levels on `data`.
    pub fn lambda1_values(&self, data: &Dataset) -> Vec<f64> {
        self.lambda1.levels(data, &vec![1.0; data.p()])
    }

    /// Descending stage-two levels for adaptive `weights`.
    pub fn lambda1_star_values(&self, data: &Dataset, weights: &[f64]) -> Vec<f64> {
        self.lambda1_star.levels(data, weights)
    }

    /// Descending SCAD levels.
    pub fn scad_values(&self, data: &Dataset) -> Vec<f64> {
        match &self.lambda1 {
            Lambda1Values::Explicit(v) => descending(v.clone()),
            Lambda1Values::Auto { count, min_ratio } => {
                log_spaced(data.max_abs_xty() / data.n() as f64, *count, *min_ratio)
            }
        }
    }
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v.dedup();
    v
}

fn log_spaced(top: f64, count: usize, min_ratio: f64) -> Vec<f64> {
    if !(top > 0.0) {
        return vec![0.0];
    }
    if count == 1 {
        return vec![top];
    }
    (0..count)
        .map(|k| top * min_ratio.powf(k as f64 / (count - 1) as f64))
        .collect()
}

/// `n log(RSS/n) + |active| log n`; `-inf` when the fit interpolates (RSS = 0).
pub fn bic_score(data: &Dataset, fit: &FitResult) -> f64 {
    let n = data.n() as f64;
    let rss = data.rss(&fit.beta);
    if rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    n * (rss / n).ln() + fit.active_set.len() as f64 * n.ln()
}

/// The winning grid point and bookkeeping over every fit evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneResult {
    pub method: Method,
    pub fit: FitResult,
    /// Stage-one l1 level for adaptive methods; the SCAD level for SCAD.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Stage-two l1 level (adaptive methods only).
    pub lambda1_star: Option<f64>,
    pub bic: f64,
    /// True when the chosen fit has zero residual and its BIC is `-inf`.
    pub degenerate: bool,
    pub fits_evaluated: usize,
    pub nonconverged: usize,
    /// Largest scaled KKT residual over every converged fit evaluated.
    pub max_scaled_kkt: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    fit: FitResult,
    lambda1: f64,
    lambda2: f64,
    bic: f64,
}

// Lower BIC first; ties toward larger lambda1, then larger lambda2.
fn better(a: &Candidate, b: &Candidate) -> bool {
    a.bic
        .total_cmp(&b.bic)
        .then(b.lambda1.total_cmp(&a.lambda1))
        .then(b.lambda2.total_cmp(&a.lambda2))
        == Ordering::Less
}

#[derive(Default)]
struct Tally {
    fits: usize,
    nonconverged: usize,
    max_kkt: f64,
}

impl Tally {
    fn record(&mut self, fit: &FitResult, scale: f64) {
        self.fits += 1;
        if fit.converged {
            self.max_kkt = self.max_kkt.max(fit.kkt_residual / scale);
        } else {
            self.nonconverged += 1;
        }
    }
}

/// Tunes `method` on `data` by BIC over `grid`.
pub fn tune(
    data: &Dataset,
    method: Method,
    grid: &Grid,
    adaptive: &AdaptiveConfig,
    solver: &SolverConfig,
) -> Result<TuneResult> {
    tune_prepared(&CoordinateDescent::new(data), method, grid, adaptive, solver)
}

/// [`tune`] on an already prepared solver, so several methods can share one Gram matrix.
pub fn tune_prepared(
    cd: &CoordinateDescent<'_>,
    method: Method,
    grid: &Grid,
    adaptive: &AdaptiveConfig,
    solver: &SolverConfig,
) -> Result<TuneResult> {
    grid.validate()?;
    solver.validate()?;
    let mut tally = Tally::default();
    let zero_l2 = [0.0];
    let (best, lambda1_star) = match method {
        Method::Lasso => (enet_grid(cd, grid, &zero_l2, solver, &mut tally)?, None),
        Method::Enet => (enet_grid(cd, grid, &grid.lambda2_values, solver, &mut tally)?, None),
        Method::AdaptiveLasso | Method::AdaptiveEnet => {
            let l2s: &[f64] = if method == Method::AdaptiveLasso { &zero_l2 } else { &grid.lambda2_values };
            let stage_one_l2s: Vec<&[f64]> = match adaptive.lambda2_selection {
                Lambda2Selection::StageOne => vec![l2s],
                Lambda2Selection::FinalBic => l2s.chunks(1).collect(),
            };
            let mut best: Option<(Candidate, f64)> = None;
            for l2 in stage_one_l2s {
                let stage_one = enet_grid(cd, grid, l2, solver, &mut tally)?;
                let stage_two = adaptive_grid(cd, grid, &stage_one, adaptive, solver, &mut tally)?;
                let star = stage_two.lambda1;
                let combined = Candidate { lambda1: stage_one.lambda1, ..stage_two };
                if best.as_ref().is_none_or(|(b, _)| better(&combined, b)) {
                    best = Some((combined, star));
                }
            }
            let (combined, star) = best.ok_or_else(|| Error::Validation("empty grid".into()))?;
            (combined, Some(star))
        }
        Method::Scad => (scad_grid(cd, grid, solver, &mut tally)?, None),
    };
    Ok(TuneResult {
        method,
        degenerate: best.bic == f64::NEG_INFINITY,
        bic: best.bic,
        fit: best.fit,
        lambda1: best.lambda1,
        lambda2: best.lambda2,
        lambda1_star,
        fits_evaluated: tally.fits,
        nonconverged: tally.nonconverged,
        max_scaled_kkt: tally.max_kkt,
    })
}

fn consider(best: &mut Option<Candidate>, cand: Candidate) {
    if best.as_ref().is_none_or(|b| better(&cand, b)) {
        *best = Some(cand);
    }
}

fn enet_grid(
    cd: &CoordinateDescent<'_>,
    grid: &Grid,
    lambda2_values: &[f64],
    solver: &SolverConfig,
    tally: &mut Tally,
) -> Result<Candidate> {
    let data = cd.data();
    let p = data.p();
    let scale = data.max_abs_xty().max(1.0);
    let lambda1_values = grid.lambda1_values(data);
    let mut best = None;
    for &lambda2 in lambda2_values {
        let mut warm: Option<Vec<f64>> = None;
        for &lambda1 in &lambda1_values {
            let fit = cd.fit(&Penalty::unit(lambda1, lambda2, p)?, solver, warm.as_deref())?;
            tally.record(&fit, scale);
            warm = Some(fit.beta_raw.clone());
            let bic = bic_score(data, &fit);
            consider(&mut best, Candidate { fit, lambda1, lambda2, bic });
        }
    }
    best.ok_or_else(|| Error::Validation("empty grid".into()))
}

fn adaptive_grid(
    cd: &CoordinateDescent<'_>,
    grid: &Grid,
    stage_one: &Candidate,
    adaptive: &AdaptiveConfig,
    solver: &SolverConfig,
    tally: &mut Tally,
) -> Result<Candidate> {
    let data = cd.data();
    let scale = data.max_abs_xty().max(1.0);
    let lambda2 = stage_one.lambda2;
    let weights = crate::adaptive::adaptive_weights(&stage_one.fit.beta, adaptive, data.n())?;
    let levels = grid.lambda1_star_values(data, &weights);
    let mut best = None;
    let mut warm: Option<Vec<f64>> = None;
    for &lambda1_star in &levels {
        let fit = second_stage(cd, &stage_one.fit.beta, lambda2, lambda1_star, adaptive, solver, warm.as_deref())?;
        tally.record(&fit, scale);
        warm = Some(fit.beta_raw.clone());
        let bic = bic_score(data, &fit);
        consider(&mut best, Candidate { fit, lambda1: lambda1_star, lambda2, bic });
    }
    best.ok_or_else(|| Error::Validation("empty grid".into()))
}

fn scad_grid(cd: &CoordinateDescent<'_>, grid: &Grid, solver: &SolverConfig, tally: &mut Tally) -> Result<Candidate> {
    let data = cd.data();
    let scale = data.max_abs_xty().max(1.0);
    let mut best = None;
    let mut warm: Option<Vec<f64>> = None;
    for lambda in grid.scad_values(data) {
        let fit = cd.fit_scad(lambda, solver, warm.as_deref())?;
        tally.record(&fit, scale);
        warm = Some(fit.beta_raw.clone());
        let bic = bic_score(data, &fit);
        consider(&mut best, Candidate { fit, lambda1: lambda, lambda2: 0.0, bic });
    }
    best.ok_or_else(|| Error::Validation("empty grid".into()))
}
