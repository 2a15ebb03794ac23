use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adenet_core::adaptive::{choose_gamma, growth_rate, AdaptiveConfig, ZeroMode};
use adenet_core::simulation::{reproduce, to_csv, Scale, StudyConfig, StudyTable};
use adenet_core::tuning::{tune, Grid, Method};
use adenet_core::{Dataset, Error, SolverConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_NONCONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "adenet", version, about = "Adaptive elastic-net fitting and simulation tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune a penalized regression by BIC on a CSV file (first column is y).
    Fit(FitArgs),
    /// Run one of the simulation tables and write it as CSV.
    Reproduce(ReproduceArgs),
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Rescale predictors to unit L2 norm before fitting.
    #[arg(long)]
    standardize: bool,
    /// Weight exponent; defaults to choose_gamma(log p / log n).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "offset")]
    zero_mode: ZeroModeArg,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReproduceArgs {
    #[arg(long, value_parser = ["1", "2", "3"])]
    table: String,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 20091)]
    seed: u64,
    #[arg(long, value_enum, default_value = "desk")]
    scale: ScaleArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lasso,
    Enet,
    Alasso,
    Aenet,
    Scad,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lasso => Method::Lasso,
            MethodArg::Enet => Method::Enet,
            MethodArg::Alasso => Method::AdaptiveLasso,
            MethodArg::Aenet => Method::AdaptiveEnet,
            MethodArg::Scad => Method::Scad,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroModeArg {
    Offset,
    Exclude,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Validation(_) => EXIT_INPUT,
            Error::DegenerateColumn { .. } | Error::Domain(_) => EXIT_DEGENERATE,
            Error::Replication { source, .. } => Failure::from((**source).clone()).code,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Serialize)]
struct FitReport {
    method: &'static str,
    n: usize,
    p: usize,
    standardized: bool,
    gamma: Option<f64>,
    lambda1: f64,
    lambda2: f64,
    lambda1_star: Option<f64>,
    /// `null` when the fit interpolates the data.
    bic: Option<f64>,
    kkt_residual: f64,
    converged: bool,
    active_set: Vec<String>,
    coefficients: Vec<Coefficient>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct Coefficient {
    name: String,
    value: f64,
}

fn coefficients(names: &[String], beta: &[f64]) -> Vec<Coefficient> {
    names.iter().zip(beta).map(|(name, &value)| Coefficient { name: name.clone(), value }).collect()
}

struct Table {
    names: Vec<String>,
    data: Dataset,
}

fn read_csv(path: &Path) -> Result<Table, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| Failure::input(format!("{}: {e}", path.display())))?.clone();
    if header.len() < 2 {
        return Err(Failure::input("expected a header with y followed by at least one predictor"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Failure::input(format!("line {line}, column {} ({}): '{cell}' is not a number", col + 1, &header[col]))
            })?;
            if !v.is_finite() {
                return Err(Failure::input(format!("line {line}, column {} ({}): non-finite value", col + 1, &header[col])));
            }
            values.push(v);
        }
        y.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    let data = Dataset::from_rows(&rows, &y)?;
    Ok(Table { names, data })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_fit(args: &FitArgs) -> Result<u8, Failure> {
    let table = read_csv(&args.input)?;
    let method = Method::from(args.method);
    let centered = table.data.center();
    let (data, norms) = if args.standardize {
        let (d, norms) = centered.standardize()?;
        (d, Some(norms))
    } else {
        (centered, None)
    };
    let (n, p) = (data.n(), data.p());
    let gamma = match args.gamma {
        Some(g) => Some(g),
        None if method.is_adaptive() => {
            let nu = growth_rate(n, p);
            Some(choose_gamma(nu).map_err(|_| {
                Failure::input(format!("log p / log n = {nu:.3} is not below 1; pass --gamma explicitly"))
            })?)
        }
        None => None,
    };
    let zero_mode = match args.zero_mode {
        ZeroModeArg::Offset => ZeroMode::RidgeOffset,
        ZeroModeArg::Exclude => ZeroMode::HardExclude,
    };
    let adaptive = AdaptiveConfig::new(gamma.unwrap_or(1.0), zero_mode)?;

    let mut warnings = Vec::new();
    let mut report = FitReport {
        method: method.label(),
        n,
        p,
        standardized: args.standardize,
        gamma,
        lambda1: 0.0,
        lambda2: 0.0,
        lambda1_star: None,
        bic: None,
        kkt_residual: 0.0,
        converged: true,
        active_set: Vec::new(),
        coefficients: coefficients(&table.names, &vec![0.0; p]),
        warnings: Vec::new(),
    };
    let mut code = 0;
    if data.y().iter().all(|&v| v == 0.0) {
        warnings.push("response is identically zero after centering; all coefficients are zero".to_string());
    } else {
        let tuned = tune(&data, method, &Grid::default(), &adaptive, &SolverConfig::default())?;
        let beta: Vec<f64> = match &norms {
            Some(norms) => tuned.fit.beta.iter().zip(norms).map(|(b, s)| b / s).collect(),
            None => tuned.fit.beta.clone(),
        };
        report.lambda1 = tuned.lambda1;
        report.lambda2 = tuned.lambda2;
        report.lambda1_star = tuned.lambda1_star;
        report.bic = tuned.bic.is_finite().then_some(tuned.bic);
        report.kkt_residual = tuned.fit.kkt_residual;
        report.converged = tuned.fit.converged;
        report.active_set = tuned.fit.active_set.iter().map(|&j| table.names[j].clone()).collect();
        report.coefficients = coefficients(&table.names, &beta);
        if tuned.degenerate {
            warnings.push("selected fit interpolates the data (zero residual)".to_string());
            code = EXIT_DEGENERATE;
        }
        if !tuned.fit.converged {
            warnings.push("coordinate descent hit the iteration limit".to_string());
            code = EXIT_NONCONVERGED;
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    report.warnings = warnings;

    println!("method      {}", report.method);
    println!("n, p        {n}, {p}");
    println!("lambda1     {}", report.lambda1);
    println!("lambda2     {}", report.lambda2);
    if let Some(l) = report.lambda1_star {
        println!("lambda1*    {l}");
    }
    match report.bic {
        Some(b) => println!("bic         {b:.4}"),
        None => println!("bic         -inf"),
    }
    println!("kkt         {:.3e}", report.kkt_residual);
    println!("active      [{}]", report.active_set.join(", "));
    for c in &report.coefficients {
        println!("  {:<12} {:>14.6}", c.name, c.value);
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_output(Some(out), &(json + "\n"))?;
    }
    Ok(code)
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<u8, Failure> {
    if args.reps == 0 {
        return Err(Failure::input("--reps must be at least 1"));
    }
    let table: StudyTable = args.table.parse()?;
    let scale = match args.scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Full => Scale::Full,
    };
    let tables = reproduce(table, args.reps, args.seed, scale, &StudyConfig::default())?;
    write_output(args.out.as_deref(), &to_csv(&tables))?;
    let nonconverged: usize = tables.iter().map(|t| t.nonconverged()).sum();
    if nonconverged > 0 {
        eprintln!("warning: {nonconverged} fits did not converge");
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ADENET_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::input(format!("ADENET_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input(format!("cannot configure thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
