//! Two-stage adaptive elastic-net.
//!
//! Stage one is a plain elastic-net fit. Its (rescaled) coefficients become
//! l1 weights `w_j = |b_j|^-gamma`, and stage two re-solves the weighted
//! problem with a new l1 level and the same `lambda2`.

use serde::Serialize;

use crate::data::{Dataset, FitResult, Penalty};
use crate::error::{validation, Error, Result};
use crate::solver::{CoordinateDescent, SolverConfig};

/// Treatment of coefficients that stage one sets to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroMode {
    /// `w_j = (|b_j| + 1/n)^-gamma`; every coefficient stays eligible.
    RidgeOffset,
    /// `w_j = +inf` when `b_j = 0`, else `|b_j|^-gamma`; zeros stay zero.
    HardExclude,
}

/// How tuning picks the shared `lambda2` of the two stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lambda2Selection {
    /// For each `lambda2`, tune stage one and then stage two; keep the
    /// `lambda2` whose stage-two fit has the lowest BIC.
    FinalBic,
    /// Take `lambda2` from the BIC-best plain elastic-net and keep it for stage two.
    StageOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptiveConfig {
    pub gamma: f64,
    pub zero_mode: ZeroMode,
    pub lambda2_selection: Lambda2Selection,
}

impl AdaptiveConfig {
    pub fn new(gamma: f64, zero_mode: ZeroMode) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        Ok(AdaptiveConfig { gamma, zero_mode, lambda2_selection: Lambda2Selection::FinalBic })
    }

    pub fn with_lambda2_selection(self, lambda2_selection: Lambda2Selection) -> Self {
        AdaptiveConfig { lambda2_selection, ..self }
    }

    /// `gamma` from [`choose_gamma`] with the default [`ZeroMode::RidgeOffset`].
    pub fn for_growth_rate(nu: f64) -> Result<Self> {
        AdaptiveConfig::new(choose_gamma(nu)?, ZeroMode::RidgeOffset)
    }
}

/// `ceil(2 nu / (1 - nu)) + 1`, the smallest integer-plus-one exponent that
/// strictly exceeds `2 nu / (1 - nu)`.
pub fn choose_gamma(nu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&nu) {
        return Err(Error::Domain(format!("growth rate nu must lie in [0, 1), got {nu}")));
    }
    Ok((2.0 * nu / (1.0 - nu)).ceil() + 1.0)
}

/// Plug-in growth rate `log(p) / log(n)` for data without a known design law.
pub fn growth_rate(n: usize, p: usize) -> f64 {
    (p as f64).ln() / (n as f64).ln()
}

pub fn adaptive_weights(beta_enet: &[f64], config: &AdaptiveConfig, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return validation("sample size must be positive");
    }
    if beta_enet.iter().any(|b| !b.is_finite()) {
        return validation("non-finite stage-one coefficient");
    }
    let offset = 1.0 / n as f64;
    let weights = beta_enet
        .iter()
        .map(|b| match config.zero_mode {
            ZeroMode::RidgeOffset => (b.abs() + offset).powf(-config.gamma),
            ZeroMode::HardExclude if *b == 0.0 => f64::INFINITY,
            ZeroMode::HardExclude => b.abs().powf(-config.gamma),
        })
        .collect();
    Ok(weights)
}

/// Stage two on a prepared solver: weights from `stage_one` (final scale),
/// then the weighted fit at `(lambda1_star, lambda2)`.
pub(crate) fn second_stage(
    cd: &CoordinateDescent<'_>,
    stage_one: &[f64],
    lambda2: f64,
    lambda1_star: f64,
    config: &AdaptiveConfig,
    solver: &SolverConfig,
    warm: Option<&[f64]>,
) -> Result<FitResult> {
    let weights = adaptive_weights(stage_one, config, cd.data().n())?;
    let penalty = Penalty::new(lambda1_star, lambda2, weights)?;
    cd.fit(&penalty, solver, warm)
}

/// Full adaptive elastic-net: elastic-net at `(lambda1_enet, lambda2)`, then
/// the weighted refit at `(lambda1_star, lambda2)`. With `lambda2 = 0` this is
/// the adaptive lasso.
pub fn adaptive_enet_fit(
    data: &Dataset,
    lambda2: f64,
    lambda1_enet: f64,
    lambda1_star: f64,
    config: &AdaptiveConfig,
    solver: &SolverConfig,
) -> Result<FitResult> {
    let cd = CoordinateDescent::new(data);
    let stage_one = cd.fit(&Penalty::unit(lambda1_enet, lambda2, data.p())?, solver, None)?;
    second_stage(&cd, &stage_one.beta, lambda2, lambda1_star, config, solver, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::weighted_enet_fit;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn signal_data(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(20, 8, |_, _| rng.random_range(-1.0..1.0));
        let beta = [4.0, 0.0, -3.0, 0.0, 0.0, 5.0, 0.0, 0.0];
        let y = DVector::from_fn(20, |i, _| {
            (0..8).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + rng.random_range(-0.5..0.5)
        });
        Dataset::new(x, y).unwrap().center()
    }

    #[test]
    fn gamma_choices() {
        assert_eq!(choose_gamma(0.5).unwrap(), 3.0);
        assert_eq!(choose_gamma(2.0 / 3.0).unwrap(), 5.0);
        assert_eq!(choose_gamma(0.0).unwrap(), 1.0);
        assert!(choose_gamma(1.0).is_err());
        assert!(choose_gamma(-0.1).is_err());
        for k in 0..100 {
            let nu = k as f64 / 100.0;
            assert!(choose_gamma(nu).unwrap() > 2.0 * nu / (1.0 - nu));
        }
    }

    #[test]
    fn weight_examples() {
        let hard = AdaptiveConfig::new(2.5, ZeroMode::HardExclude).unwrap();
        assert_eq!(adaptive_weights(&[1.0, -1.0, 1.0], &hard, 10).unwrap(), vec![1.0; 3]);
        let w = adaptive_weights(&[0.0, 2.0], &hard, 10).unwrap();
        assert!(w[0].is_infinite());
        let offset = AdaptiveConfig::new(3.0, ZeroMode::RidgeOffset).unwrap();
        let w = adaptive_weights(&[0.5], &offset, 100).unwrap();
        let expected = 1.0 / (0.51 * 0.51 * 0.51);
        assert!((w[0] - expected).abs() < 1e-12);
        assert!((w[0] - 7.53858).abs() < 1e-5);
    }

    #[test]
    fn weights_are_monotone_in_magnitude() {
        let cfg = AdaptiveConfig::new(1.5, ZeroMode::RidgeOffset).unwrap();
        let beta = [0.0, -0.3, 2.0, 0.01, -5.0, 0.3];
        let w = adaptive_weights(&beta, &cfg, 50).unwrap();
        for a in 0..beta.len() {
            for b in 0..beta.len() {
                if beta[a].abs() >= beta[b].abs() {
                    assert!(w[a] <= w[b]);
                }
            }
        }
    }

    #[test]
    fn zero_lambda2_matches_adaptive_lasso() {
        let d = signal_data(1);
        let cfg = AdaptiveConfig::new(1.0, ZeroMode::RidgeOffset).unwrap();
        let solver = SolverConfig::default();
        let fit = adaptive_enet_fit(&d, 0.0, 2.0, 1.0, &cfg, &solver).unwrap();
        let lasso = weighted_enet_fit(&d, &Penalty::unit(2.0, 0.0, 8).unwrap(), &solver).unwrap();
        let w = adaptive_weights(&lasso.beta, &cfg, 20).unwrap();
        let alasso = weighted_enet_fit(&d, &Penalty::new(1.0, 0.0, w).unwrap(), &solver).unwrap();
        assert_eq!(fit.beta, alasso.beta);
    }

    #[test]
    fn no_penalty_is_ols() {
        let d = signal_data(2);
        let cfg = AdaptiveConfig::new(1.0, ZeroMode::RidgeOffset).unwrap();
        let solver = SolverConfig { tol: 1e-12, ..SolverConfig::default() };
        let fit = adaptive_enet_fit(&d, 0.0, 0.0, 0.0, &cfg, &solver).unwrap();
        let ols = d.x().tr_mul(d.x()).cholesky().unwrap().solve(&d.x().tr_mul(d.y()));
        for j in 0..8 {
            assert!((fit.beta[j] - ols[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn hard_exclude_support_nests() {
        let d = signal_data(3);
        let cfg = AdaptiveConfig::new(1.0, ZeroMode::HardExclude).unwrap();
        let solver = SolverConfig::default();
        let stage1 = weighted_enet_fit(&d, &Penalty::unit(4.0, 0.5, 8).unwrap(), &solver).unwrap();
        let fit = adaptive_enet_fit(&d, 0.5, 4.0, 0.5, &cfg, &solver).unwrap();
        assert!(stage1.active_set.len() < 8);
        assert!(fit.active_set.iter().all(|j| stage1.active_set.contains(j)));
    }

    #[test]
    fn only_weight_products_matter() {
        let d = signal_data(4);
        let solver = SolverConfig { tol: 1e-13, ..SolverConfig::default() };
        let w = vec![0.5, 3.0, 1.2, 8.0, 2.0, 0.3, f64::INFINITY, 4.0];
        let base = weighted_enet_fit(&d, &Penalty::new(2.0, 0.4, w.clone()).unwrap(), &solver).unwrap();
        let c = 7.5;
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let other = weighted_enet_fit(&d, &Penalty::new(2.0 / c, 0.4, scaled).unwrap(), &solver).unwrap();
        for j in 0..8 {
            assert!((base.beta[j] - other.beta[j]).abs() < 1e-10);
        }
    }
}
