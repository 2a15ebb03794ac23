//! Replicated fits and MSE / C / IC aggregation.

use rayon::prelude::*;
use serde::Serialize;

use crate::adaptive::{AdaptiveConfig, Lambda2Selection, ZeroMode};
use crate::data::{Design, Scenario};
use crate::error::{validation, Error, Result};
use crate::screening::sis_tune;
use crate::simulation::design::{replicate, Replicate};
use crate::solver::{CoordinateDescent, SolverConfig};
use crate::tuning::{tune_prepared, Grid, Method, TuneResult};

/// Estimation error and selection counts of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// `(b - b*)' Sigma (b - b*)` with the population covariance.
    pub mse: f64,
    /// True zeros estimated as zero.
    pub c: usize,
    /// True nonzeros estimated as zero.
    pub ic: usize,
}

impl Metrics {
    pub fn exact_support(&self, p: usize, support: usize) -> bool {
        self.ic == 0 && self.c == p - support
    }
}

/// Population quadratic form `d' Sigma d` for the scenario's design.
pub fn population_quadratic_form(scenario: &Scenario, d: &[f64]) -> f64 {
    match scenario.design {
        Design::Independent => d.iter().map(|v| v * v).sum(),
        Design::Ar1 => {
            let rho = scenario.rho;
            let mut total = 0.0;
            for j in 0..d.len() {
                if d[j] == 0.0 {
                    continue;
                }
                total += d[j] * d[j];
                let mut weight = 1.0;
                for k in j + 1..d.len() {
                    weight *= rho;
                    if weight == 0.0 {
                        break;
                    }
                    total += 2.0 * weight * d[j] * d[k];
                }
            }
            total
        }
    }
}

pub fn metrics(beta_hat: &[f64], beta_star: &[f64], scenario: &Scenario) -> Result<Metrics> {
    if beta_hat.len() != beta_star.len() || beta_star.len() != scenario.p {
        return validation(format!(
            "dimension mismatch: estimate {}, truth {}, scenario p = {}",
            beta_hat.len(),
            beta_star.len(),
            scenario.p
        ));
    }
    let diff: Vec<f64> = beta_hat.iter().zip(beta_star).map(|(a, b)| a - b).collect();
    let mse = population_quadratic_form(scenario, &diff);
    let mut c = 0;
    let mut ic = 0;
    for (h, s) in beta_hat.iter().zip(beta_star) {
        if *h == 0.0 {
            if *s == 0.0 {
                c += 1;
            } else {
                ic += 1;
            }
        }
    }
    Ok(Metrics { mse, c, ic })
}

/// A row of a results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyMethod {
    /// The true coefficients, reported as an estimate.
    Truth,
    Tuned(Method),
    /// SIS down to `d_n` columns, then the tuned method.
    Screened { method: Method, d_n: usize },
}

impl StudyMethod {
    pub fn label(&self) -> String {
        match self {
            StudyMethod::Truth => "Truth".to_string(),
            StudyMethod::Tuned(m) => m.label().to_string(),
            StudyMethod::Screened { method, .. } => format!("SIS + {}", method.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub grid: Grid,
    pub solver: SolverConfig,
    pub zero_mode: ZeroMode,
    pub lambda2_selection: Lambda2Selection,
    /// Replaces the scenario's weight exponent when set.
    pub gamma: Option<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            grid: Grid::default(),
            solver: SolverConfig::default(),
            zero_mode: ZeroMode::RidgeOffset,
            lambda2_selection: Lambda2Selection::FinalBic,
            gamma: None,
        }
    }
}

impl StudyConfig {
    pub fn adaptive_for(&self, scenario: &Scenario) -> Result<AdaptiveConfig> {
        Ok(AdaptiveConfig::new(self.gamma.unwrap_or(scenario.gamma), self.zero_mode)?
            .with_lambda2_selection(self.lambda2_selection))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: StudyMethod,
    pub beta: Vec<f64>,
    pub metrics: Metrics,
    pub exact_support: bool,
    /// `None` for the truth row.
    pub tuned: Option<TuneResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub beta_star: Vec<f64>,
    pub methods: Vec<MethodOutcome>,
}

/// Fits every method on replication `r` of `scenario`.
pub fn run_replication(
    scenario: &Scenario,
    r: usize,
    methods: &[StudyMethod],
    config: &StudyConfig,
) -> Result<ReplicationOutcome> {
    let Replicate { data, beta_star } = replicate(scenario, r)?;
    let adaptive = config.adaptive_for(scenario)?;
    let cd = CoordinateDescent::new(&data);
    let support = beta_star.iter().filter(|b| **b != 0.0).count();
    let mut outcomes = Vec::with_capacity(methods.len());
    for method in methods {
        let (beta, tuned) = match *method {
            StudyMethod::Truth => (beta_star.clone(), None),
            StudyMethod::Tuned(m) => {
                let t = tune_prepared(&cd, m, &config.grid, &adaptive, &config.solver)?;
                (t.fit.beta.clone(), Some(t))
            }
            StudyMethod::Screened { method: m, d_n } => {
                let s = sis_tune(&data, d_n, m, &config.grid, &adaptive, &config.solver)?;
                (s.tuned.fit.beta.clone(), Some(s.tuned))
            }
        };
        let m = metrics(&beta, &beta_star, scenario)?;
        outcomes.push(MethodOutcome {
            method: *method,
            exact_support: m.exact_support(scenario.p, support),
            metrics: m,
            beta,
            tuned,
        });
    }
    Ok(ReplicationOutcome { replication: r, beta_star, methods: outcomes })
}

/// Runs every replication (in parallel); output order and values do not
/// depend on scheduling. The first failing replication, in index order, is reported.
pub fn run_outcomes(scenario: &Scenario, methods: &[StudyMethod], config: &StudyConfig) -> Result<Vec<ReplicationOutcome>> {
    if scenario.replications < 2 {
        return validation("a study needs at least 2 replications");
    }
    scenario.validate()?;
    let results: Vec<Result<ReplicationOutcome>> = (0..scenario.replications)
        .into_par_iter()
        .map(|r| {
            run_replication(scenario, r, methods, config).map_err(|e| Error::Replication {
                replication: r,
                seed: scenario.seed,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub method: String,
    pub mse_mean: f64,
    /// Standard error of the mean over replications.
    pub mse_se: f64,
    pub c_mean: f64,
    pub ic_mean: f64,
    pub exact_support_rate: f64,
    /// Largest scaled KKT residual over every converged fit behind this row.
    pub max_scaled_kkt: f64,
    pub nonconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub support: usize,
    pub rho: f64,
    pub replications: usize,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, label: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.method == label)
    }

    pub fn nonconverged(&self) -> usize {
        self.rows.iter().map(|r| r.nonconverged).sum()
    }
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Aggregates outcomes (in replication order) into one row per method.
pub fn aggregate(scenario: &Scenario, methods: &[StudyMethod], outcomes: &[ReplicationOutcome]) -> MetricsTable {
    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, method)| {
            let per_rep: Vec<&MethodOutcome> = outcomes.iter().map(|o| &o.methods[k]).collect();
            let mses: Vec<f64> = per_rep.iter().map(|m| m.metrics.mse).collect();
            let (mse_mean, mse_se) = mean_and_se(&mses);
            let reps = per_rep.len() as f64;
            MetricsRow {
                method: method.label(),
                mse_mean,
                mse_se,
                c_mean: per_rep.iter().map(|m| m.metrics.c as f64).sum::<f64>() / reps,
                ic_mean: per_rep.iter().map(|m| m.metrics.ic as f64).sum::<f64>() / reps,
                exact_support_rate: per_rep.iter().filter(|m| m.exact_support).count() as f64 / reps,
                max_scaled_kkt: per_rep
                    .iter()
                    .filter_map(|m| m.tuned.as_ref().map(|t| t.max_scaled_kkt))
                    .fold(0.0, f64::max),
                nonconverged: per_rep.iter().filter_map(|m| m.tuned.as_ref().map(|t| t.nonconverged)).sum(),
            }
        })
        .collect();
    MetricsTable {
        scenario: scenario.name.clone(),
        n: scenario.n,
        p: scenario.p,
        support: scenario.support_size(),
        rho: scenario.rho,
        replications: outcomes.len(),
        rows,
    }
}

pub fn run_study(scenario: &Scenario, methods: &[StudyMethod], config: &StudyConfig) -> Result<MetricsTable> {
    let outcomes = run_outcomes(scenario, methods, config)?;
    Ok(aggregate(scenario, methods, &outcomes))
}
