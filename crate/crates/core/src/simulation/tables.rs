//! The three standard simulation tables: two AR(1) designs and a screening design.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::screening::default_screen_size;
use crate::simulation::design::{example1_scenario, example2_scenario, sis_scenario};
use crate::simulation::study::{run_study, MetricsTable, StudyConfig, StudyMethod};
use crate::tuning::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyTable {
    /// AR(1) design with `p = floor(4 sqrt(n)) - 5`.
    Table1,
    /// AR(1) design with `p = floor(4 n^(2/3)) - 5`.
    Table2,
    /// SIS example, `n = 200`, `p = 1000`.
    Table3,
}

impl FromStr for StudyTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches("table") {
            "1" => Ok(StudyTable::Table1),
            "2" => Ok(StudyTable::Table2),
            "3" => Ok(StudyTable::Table3),
            _ => validation(format!("unknown table '{s}' (expected 1, 2 or 3)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    /// Sample sizes up to 200 for the AR(1) tables.
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => validation(format!("unknown scale '{s}' (expected desk or full)")),
        }
    }
}

pub const RHOS: [f64; 2] = [0.5, 0.75];

/// Row order of the AR(1) tables.
pub fn ar1_methods() -> Vec<StudyMethod> {
    let mut v = vec![StudyMethod::Truth];
    v.extend(
        [Method::Lasso, Method::AdaptiveLasso, Method::Enet, Method::AdaptiveEnet, Method::Scad]
            .into_iter()
            .map(StudyMethod::Tuned),
    );
    v
}

pub fn sis_methods(d_n: usize) -> Vec<StudyMethod> {
    vec![
        StudyMethod::Truth,
        StudyMethod::Screened { method: Method::AdaptiveEnet, d_n },
        StudyMethod::Screened { method: Method::Scad, d_n },
    ]
}

pub fn sample_sizes(table: StudyTable, scale: Scale) -> Vec<usize> {
    match (table, scale) {
        (StudyTable::Table1, Scale::Desk) | (StudyTable::Table2, Scale::Desk) => vec![100, 200],
        (StudyTable::Table1, Scale::Full) => vec![100, 200, 400],
        (StudyTable::Table2, Scale::Full) => vec![100, 200, 800],
        (StudyTable::Table3, _) => vec![200],
    }
}

/// Seed of block `k` of a table; blocks never share random streams.
pub fn block_seed(seed: u64, block: usize) -> u64 {
    seed.wrapping_add((block as u64) << 32)
}

/// Runs every block of `table` with `replications` each.
pub fn reproduce(
    table: StudyTable,
    replications: usize,
    seed: u64,
    scale: Scale,
    config: &StudyConfig,
) -> Result<Vec<MetricsTable>> {
    let mut out = Vec::new();
    match table {
        StudyTable::Table1 | StudyTable::Table2 => {
            let mut block = 0;
            for rho in RHOS {
                for n in sample_sizes(table, scale) {
                    let s = block_seed(seed, block);
                    let mut scenario =
                        if table == StudyTable::Table1 { example1_scenario(n, rho, s)? } else { example2_scenario(n, rho, s)? };
                    scenario.replications = replications;
                    out.push(run_study(&scenario, &ar1_methods(), config)?);
                    block += 1;
                }
            }
        }
        StudyTable::Table3 => {
            let n = 200;
            let mut scenario = sis_scenario(n, 1000, block_seed(seed, 0))?;
            scenario.replications = replications;
            out.push(run_study(&scenario, &sis_methods(default_screen_size(n)), config)?);
        }
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "rho,n,p,support,method,mse_mean,mse_se,c_mean,ic_mean,exact_support_rate";

/// Fixed-column CSV, four decimals, LF line endings.
pub fn to_csv(tables: &[MetricsTable]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for t in tables {
        for r in &t.rows {
            let _ = writeln!(
                s,
                "{:.4},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                t.rho, t.n, t.p, t.support, r.method, r.mse_mean, r.mse_se, r.c_mean, r.ic_mean, r.exact_support_rate
            );
        }
    }
    s
}
