//! Sure independence screening and the screen-then-fit pipelines.

use serde::Serialize;

use crate::adaptive::{growth_rate, AdaptiveConfig};
use crate::data::Dataset;
use crate::error::{validation, Result};
use crate::solver::SolverConfig;
use crate::tuning::{tune, Grid, Method, TuneResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenResult {
    /// Retained columns, ascending.
    pub kept: Vec<usize>,
    /// `|x_j' y| / ||x_j||` for every column.
    pub scores: Vec<f64>,
    /// Columns with zero norm; their score is 0.
    pub zero_norm_columns: Vec<usize>,
}

/// `floor(5.5 n^(2/3))`.
pub fn default_screen_size(n: usize) -> usize {
    (5.5 * (n as f64).powf(2.0 / 3.0)).floor() as usize
}

/// Keeps the `d_n` columns with the largest marginal association with `y`.
/// Ties go to the lower index.
pub fn sis_screen(data: &Dataset, d_n: usize) -> Result<ScreenResult> {
    if d_n == 0 {
        return validation("screen size must be at least 1");
    }
    let xty = data.x().tr_mul(data.y());
    let mut zero_norm_columns = Vec::new();
    let scores: Vec<f64> = data
        .x()
        .column_iter()
        .zip(xty.iter())
        .enumerate()
        .map(|(j, (col, c))| {
            let norm = col.norm();
            if norm == 0.0 {
                zero_norm_columns.push(j);
                0.0
            } else {
                c.abs() / norm
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order.into_iter().take(d_n).collect();
    kept.sort_unstable();
    Ok(ScreenResult { kept, scores, zero_norm_columns })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenedFit {
    pub screen: ScreenResult,
    /// Tuned fit with coefficients scattered back to length `p`.
    pub tuned: TuneResult,
}

/// Screens to `d_n` columns, then tunes `method` on the retained columns.
pub fn sis_tune(
    data: &Dataset,
    d_n: usize,
    method: Method,
    grid: &Grid,
    adaptive: &AdaptiveConfig,
    solver: &SolverConfig,
) -> Result<ScreenedFit> {
    let screen = sis_screen(data, d_n)?;
    let reduced = data.select_columns(&screen.kept)?;
    let mut tuned = tune(&reduced, method, grid, adaptive, solver)?;
    tuned.fit = tuned.fit.scatter(&screen.kept, data.p());
    Ok(ScreenedFit { screen, tuned })
}

/// SIS followed by the tuned adaptive elastic-net.
///
/// Without an explicit `adaptive` config, `gamma` comes from the plug-in
/// growth rate `log(d_n) / log(n)`.
pub fn sis_aenet(
    data: &Dataset,
    d_n: usize,
    grid: &Grid,
    adaptive: Option<&AdaptiveConfig>,
    solver: &SolverConfig,
) -> Result<ScreenedFit> {
    let config = match adaptive {
        Some(c) => *c,
        None => AdaptiveConfig::for_growth_rate(growth_rate(data.n(), d_n.min(data.p())))?,
    };
    sis_tune(data, d_n, Method::AdaptiveEnet, grid, &config, solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::ZeroMode;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn data(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(40, 12, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(40, |i, _| 2.0 * x[(i, 3)] - 1.5 * x[(i, 7)] + rng.sample::<f64, _>(StandardNormal));
        Dataset::new(x, y).unwrap().center()
    }

    #[test]
    fn full_screen_keeps_everything() {
        let d = data(1);
        assert_eq!(sis_screen(&d, 12).unwrap().kept, (0..12).collect::<Vec<_>>());
        assert_eq!(sis_screen(&d, 50).unwrap().kept.len(), 12);
        assert!(sis_screen(&d, 0).is_err());
    }

    #[test]
    fn perfect_marginal_is_kept() {
        let d = data(2);
        let mut x = d.x().clone();
        x.set_column(5, d.y());
        let d = Dataset::new(x, d.y().clone()).unwrap();
        assert_eq!(sis_screen(&d, 1).unwrap().kept, vec![5]);
    }

    #[test]
    fn ties_prefer_lower_index_and_zero_columns_flagged() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, -1.0, 0.0, -1.0, 0.0, 0.0, 0.0]);
        let d = Dataset::new(x, DVector::from_vec(vec![1.0, -1.0, 0.0])).unwrap();
        let s = sis_screen(&d, 1).unwrap();
        assert_eq!(s.kept, vec![0]);
        assert_eq!(s.zero_norm_columns, vec![1]);
        assert_eq!(s.scores[1], 0.0);
    }

    #[test]
    fn invariant_to_response_scaling() {
        let d = data(3);
        let scaled = d.with_response(d.y() * 3.0).unwrap();
        for k in 1..=12 {
            assert_eq!(sis_screen(&d, k).unwrap().kept, sis_screen(&scaled, k).unwrap().kept);
        }
    }

    #[test]
    fn kept_sets_nest() {
        let d = data(4);
        for k in 1..12 {
            let small = sis_screen(&d, k).unwrap().kept;
            let big = sis_screen(&d, k + 1).unwrap().kept;
            assert!(small.iter().all(|j| big.contains(j)));
        }
    }

    #[test]
    fn default_size() {
        assert_eq!(default_screen_size(200), 188);
    }

    #[test]
    fn identity_screen_matches_plain_tuning() {
        let d = data(5);
        let cfg = AdaptiveConfig::new(2.0, ZeroMode::RidgeOffset).unwrap();
        let solver = SolverConfig::default();
        let grid = Grid::default();
        let screened = sis_aenet(&d, 12, &grid, Some(&cfg), &solver).unwrap();
        let plain = tune(&d, Method::AdaptiveEnet, &grid, &cfg, &solver).unwrap();
        assert_eq!(screened.tuned.fit.beta, plain.fit.beta);
    }

    #[test]
    fn off_screen_coefficients_are_zero() {
        let d = data(6);
        let fit = sis_aenet(&d, 4, &Grid::default(), None, &SolverConfig::default()).unwrap();
        for j in 0..12 {
            if !fit.screen.kept.contains(&j) {
                assert_eq!(fit.tuned.fit.beta[j], 0.0);
            }
        }
        assert_eq!(fit.tuned.fit.beta.len(), 12);
    }
}
