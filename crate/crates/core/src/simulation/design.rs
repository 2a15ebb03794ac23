//! Generative designs: AR(1) Gaussian predictors, the fixed-coefficient
//! examples and the randomly signed screening example.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

use crate::data::{support_of, CoefficientLaw, Dataset, Design, Scenario};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_REPLICATIONS: usize = 100;

/// One row with `Cov(x_j, x_k) = rho^|j-k|`, built as the stationary AR(1)
/// recursion `x_1 = z_1`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j`.
pub fn gen_ar1_row<R: Rng + ?Sized>(p: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let innovation = (1.0 - rho * rho).sqrt();
    let mut row = Vec::with_capacity(p);
    let mut prev = 0.0;
    for j in 0..p {
        let z: f64 = rng.sample(StandardNormal);
        let v = if j == 0 { z } else { rho * prev + innovation * z };
        row.push(v);
        prev = v;
    }
    row
}

pub fn ar1_design<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for (j, v) in gen_ar1_row(p, rho, rng).into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    x
}

// floor of a computed power, nudged so exact integers are not lost to rounding
fn floor_nudged(v: f64) -> i64 {
    (v + 1e-9).floor() as i64
}

fn fixed_blocks_scenario(name: &str, n: usize, p: i64, rho: f64, seed: u64, nu: f64, gamma: f64) -> Result<Scenario> {
    if p <= 0 {
        return Err(Error::Domain(format!("n = {n} gives nonpositive dimension p = {p}")));
    }
    let p = p as usize;
    let q = p / 9;
    let beta_star: Vec<f64> = (0..p).map(|j| if j < 3 * q { 3.0 } else { 0.0 }).collect();
    let scenario = Scenario {
        name: name.to_string(),
        n,
        p,
        rho,
        sigma: 6.0,
        support: support_of(&beta_star),
        beta_star,
        gamma,
        nu,
        seed,
        replications: DEFAULT_REPLICATIONS,
        design: Design::Ar1,
        coefficients: CoefficientLaw::Fixed,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// `p = floor(4 sqrt(n)) - 5`, `beta* = (3 1_q, 3 1_q, 3 1_q, 0)` with `q = floor(p / 9)`,
/// `sigma = 6`, growth rate 1/2 and `gamma = 3`.
pub fn example1_scenario(n: usize, rho: f64, seed: u64) -> Result<Scenario> {
    let p = floor_nudged(4.0 * (n as f64).sqrt()) - 5;
    fixed_blocks_scenario("example1", n, p, rho, seed, 0.5, 3.0)
}

/// As [`example1_scenario`] with `p = floor(4 n^(2/3)) - 5`, growth rate 2/3 and `gamma = 5`.
pub fn example2_scenario(n: usize, rho: f64, seed: u64) -> Result<Scenario> {
    let p = floor_nudged(4.0 * (n as f64).cbrt().powi(2)) - 5;
    fixed_blocks_scenario("example2", n, p, rho, seed, 2.0 / 3.0, 5.0)
}

pub const SIS_SUPPORT: usize = 8;

/// `4 log(n) / sqrt(n)`, the minimum signal size of the screening example.
pub fn sis_signal_floor(n: usize) -> f64 {
    let n = n as f64;
    4.0 * n.ln() / n.sqrt()
}

/// Independent standard normal predictors, `sigma = 1.5`, eight nonzero
/// coefficients redrawn each replication as `(-1)^u (a_n + |z|)`,
/// `u ~ Bernoulli(0.4)`. Growth rate 2/3 (that of the screen size) gives `gamma = 5`.
pub fn sis_scenario(n: usize, p: usize, seed: u64) -> Result<Scenario> {
    if p < SIS_SUPPORT {
        return Err(Error::Domain(format!("p = {p} is smaller than the support size {SIS_SUPPORT}")));
    }
    let a_n = sis_signal_floor(n);
    let beta_star: Vec<f64> = (0..p).map(|j| if j < SIS_SUPPORT { a_n } else { 0.0 }).collect();
    let scenario = Scenario {
        name: "sis".to_string(),
        n,
        p,
        rho: 0.0,
        sigma: 1.5,
        support: support_of(&beta_star),
        beta_star,
        gamma: 5.0,
        nu: 2.0 / 3.0,
        seed,
        replications: DEFAULT_REPLICATIONS,
        design: Design::Independent,
        coefficients: CoefficientLaw::RandomSigned { a_n, prob_negative: 0.4 },
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Data and truth for one replication.
#[derive(Debug, Clone)]
pub struct Replicate {
    /// Centred sample.
    pub data: Dataset,
    pub beta_star: Vec<f64>,
}

/// True coefficients used in replication `r`.
pub fn coefficients_for(scenario: &Scenario, r: usize) -> Vec<f64> {
    match scenario.coefficients {
        CoefficientLaw::Fixed => scenario.beta_star.clone(),
        CoefficientLaw::RandomSigned { a_n, prob_negative } => {
            let mut rng = stream_rng(scenario.seed, r as u64, Stream::Coefficients);
            let flip = Bernoulli::new(prob_negative).expect("probability in [0, 1]");
            scenario
                .beta_star
                .iter()
                .map(|b| {
                    if *b == 0.0 {
                        return 0.0;
                    }
                    let negative = flip.sample(&mut rng);
                    let z: f64 = rng.sample(StandardNormal);
                    let magnitude = a_n + z.abs();
                    if negative {
                        -magnitude
                    } else {
                        magnitude
                    }
                })
                .collect()
        }
    }
}

pub fn replicate(scenario: &Scenario, r: usize) -> Result<Replicate> {
    let beta_star = coefficients_for(scenario, r);
    let mut design_rng = stream_rng(scenario.seed, r as u64, Stream::Design);
    let rho = match scenario.design {
        Design::Ar1 => scenario.rho,
        Design::Independent => 0.0,
    };
    let x = ar1_design(scenario.n, scenario.p, rho, &mut design_rng);
    let mut noise_rng = stream_rng(scenario.seed, r as u64, Stream::Noise);
    let signal = &x * DVector::from_column_slice(&beta_star);
    let y = DVector::from_fn(scenario.n, |i, _| {
        signal[i] + scenario.sigma * noise_rng.sample::<f64, _>(StandardNormal)
    });
    let data = Dataset::new(x, y)?.center();
    Ok(Replicate { data, beta_star })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_dimensions() {
        for (n, p, a) in [(100, 35, 9), (200, 51, 15), (400, 75, 24)] {
            let s = example1_scenario(n, 0.5, 1).unwrap();
            assert_eq!((s.p, s.support_size()), (p, a));
            assert_eq!(s.gamma, 3.0);
        }
        for (n, p, a) in [(100, 81, 27), (200, 131, 42), (800, 339, 111)] {
            let s = example2_scenario(n, 0.75, 1).unwrap();
            assert_eq!((s.p, s.support_size()), (p, a));
            assert_eq!(s.gamma, 5.0);
        }
        assert!(example1_scenario(1, 0.5, 1).is_err());
    }

    #[test]
    fn signal_floor() {
        let expected = 4.0 * 200f64.ln() / 200f64.sqrt();
        assert!((sis_signal_floor(200) - expected).abs() < 1e-15);
        assert!((sis_signal_floor(200) - 1.498590).abs() < 1e-6);
    }

    #[test]
    fn sis_coefficients_respect_floor() {
        let s = sis_scenario(200, 1000, 9).unwrap();
        for r in 0..50 {
            let b = coefficients_for(&s, r);
            assert_eq!(support_of(&b), (0..8).collect::<Vec<_>>());
            assert!(b[..8].iter().all(|v| v.abs() >= s.beta_star[0]));
        }
        assert_eq!(s.p - s.support_size(), 992);
    }

    #[test]
    fn rho_zero_rows_are_independent_normals() {
        let mut a = stream_rng(1, 0, Stream::Design);
        let mut b = stream_rng(1, 0, Stream::Design);
        let row = gen_ar1_row(6, 0.0, &mut a);
        let direct: Vec<f64> = (0..6).map(|_| b.sample::<f64, _>(StandardNormal)).collect();
        assert_eq!(row, direct);
    }

    #[test]
    fn ar1_empirical_covariance() {
        let mut rng = stream_rng(5, 0, Stream::Auxiliary);
        let (p, rho, rows) = (5, 0.75, 100_000);
        let mut acc = vec![0.0; p * p];
        for _ in 0..rows {
            let x = gen_ar1_row(p, rho, &mut rng);
            for j in 0..p {
                for k in 0..p {
                    acc[j * p + k] += x[j] * x[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..p {
                let cov = acc[j * p + k] / rows as f64;
                let target = rho.powi((j as i32 - k as i32).abs());
                assert!((cov - target).abs() < 0.02, "({j},{k}) {cov} vs {target}");
            }
        }
    }

    #[test]
    fn replicates_are_reproducible_and_centred() {
        let s = example1_scenario(100, 0.5, 77).unwrap();
        let a = replicate(&s, 3).unwrap();
        let b = replicate(&s, 3).unwrap();
        let c = replicate(&s, 4).unwrap();
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, c.data);
        assert!(a.data.is_centered());
    }
}
