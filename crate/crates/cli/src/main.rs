//! `illposed run` and `illposed compare`.
//!
//! Exit status: 0 on success, 1 when a run violates a structural invariant
//! or a comparison finds differences, 2 for configuration and schema errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use illposed::experiment::{self, parse_kv, ExperimentConfig};
use illposed::Error;

#[derive(Parser)]
#[command(name = "illposed", version, about = "Krylov regularization experiments for discrete ill-posed problems")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSV and SVG artifacts.
    Run(RunArgs),
    /// Compare the CSV artifacts of two runs.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// shaw, gravity, deriv2, heat, prescribed or picard.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Relative noise level ‖e‖/‖b_true‖.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Subset of abcd.
    #[arg(long)]
    panels: Option<String>,
    /// desk or paper; picks the default problem size.
    #[arg(long)]
    scale: Option<String>,
    /// Any other configuration key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Relative tolerance for one column, as column=value.
    #[arg(long = "tol", value_name = "COLUMN=VALUE")]
    tol: Vec<String>,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Schema(_) => Failure::Config(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn split_pair(text: &str) -> Result<(String, String), Failure> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("expected key=value, got {text:?}")))
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Config)?;
            parse_kv(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("problem", args.problem.clone()),
        ("n", args.n.map(|v| v.to_string())),
        ("noise", args.noise.map(|v| format!("{v:e}"))),
        ("seed", args.seed.map(|v| v.to_string())),
        ("kmax", args.kmax.map(|v| v.to_string())),
        ("out", args.out.as_ref().map(|p| p.display().to_string())),
        ("panels", args.panels.clone()),
        ("scale", args.scale.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            if key == "noise" {
                map.remove("epsilon");
            }
            map.insert(key.to_string(), v);
        }
    }
    for pair in &args.set {
        let (k, v) = split_pair(pair)?;
        map.insert(k, v);
    }
    Ok(ExperimentConfig::from_map(&map)?)
}

fn run(args: RunArgs) -> Result<ExitCode, Failure> {
    let config = build_config(&args)?;
    let artifact = experiment::run(&config)?;
    let s = &artifact.summary;
    let show = |v: Option<usize>| v.map_or("none".to_string(), |k| k.to_string());
    println!("{config}");
    println!(
        "k* = {}  k0 = {}  best TSVD k = {}  err LSQR = {:.4e}  err TSVD = {:.4e}",
        s.kstar, s.k0, s.k0_realized, s.best_error_lsqr, s.best_error_tsvd
    );
    println!(
        "first natural-order failure: {}  first near-best failure: {}  breakdown: {}",
        show(s.first_natural_order_failure),
        show(s.first_near_best_failure),
        show(s.breakdown)
    );
    println!("artifacts in {}", artifact.dir.display());
    if artifact.violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &artifact.violations {
            eprintln!("invariant violated: {v}");
        }
        Ok(ExitCode::from(1))
    }
}

fn compare(args: CompareArgs) -> Result<ExitCode, Failure> {
    let mut tolerances = BTreeMap::new();
    for pair in &args.tol {
        let (k, v) = split_pair(pair)?;
        let tol: f64 = v
            .parse()
            .map_err(|_| Failure::Config(anyhow::anyhow!("tolerance for {k} is not a number: {v:?}")))?;
        tolerances.insert(k, tol);
    }
    let report = experiment::compare(&args.a, &args.b, &tolerances)?;
    print!("{}", report.render());
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("{e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
