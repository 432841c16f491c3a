use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use maxtensor::asymptotics::{GumbelLimit, Sidedness};
use maxtensor::diagnostics::{
    b1_bound, estimate_lambda_grid, estimate_pair_tail, moderate_deviation_ratio, stein_chen_report,
    PairTailSpec, SteinChenConfig,
};
use maxtensor::hypotest::{test_independence, test_independence_multi, TestOptions};
use maxtensor::lab::{run_experiment, ExperimentConfig, DEFAULT_MASTER_SEED};
use maxtensor::matrix::DataMatrix;
use maxtensor::populations::{Family, PopulationSpec};
use maxtensor::statcore::MultiSampleInput;
use maxtensor::{Error, Result, SeedSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_IO: u8 = 4;

/// Largest-entry statistics of sample moment tensors and the independence test built on them.
#[derive(Parser, Debug)]
#[command(name = "maxtensor", version)]
struct Cli {
    /// Worker threads (default: all available cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Master seed for every random stream [default: 20170601, or the config's own seed for `simulate`].
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a replicated experiment described by a JSON config and persist its report.
    Simulate(SimulateArgs),
    /// Test independence of the columns of one or more CSV matrices.
    Test(TestArgs),
    /// Monte Carlo diagnostics of the Poisson approximation and the moderate-deviation step.
    Diagnose(DiagnoseArgs),
    /// Quantile or CDF of the limit law.
    Quantile(QuantileArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment config (JSON with fields grid, reps, master_seed, z_grid, output_path).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory; overrides the config's output_path.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    Two,
    One,
}

impl From<Side> for Sidedness {
    fn from(s: Side) -> Self {
        match s {
            Side::Two => Sidedness::TwoSided,
            Side::One => Sidedness::OneSided,
        }
    }
}

#[derive(Args, Debug)]
struct TestArgs {
    /// Headerless numeric CSV, one row per observation. Repeat for the multi-population statistic.
    #[arg(long, value_name = "FILE", required = true)]
    input: Vec<PathBuf>,
    /// Tensor order m (ignored when several inputs are given; m is then their count).
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Two-sided uses the absolute maximum, one-sided the signed maximum.
    #[arg(long, value_enum, default_value_t = Side::Two)]
    sided: Side,
    /// Center and scale each column to sample mean 0 and variance 1 first.
    #[arg(long)]
    studentize: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    /// λ̂_p = C(p,m)·P̂(single tuple exceeds √(2m)ν_p(z)) at each z.
    Lambda,
    /// λ̂_p together with the counting bound b1.
    B1,
    /// P̂(both of two tuples sharing s coordinates exceed a√(n log p)).
    Pairtail,
    /// P̂(S_n/√n ≥ x)/(1 − Φ(x)) for a sum of products of m draws.
    Mdr,
    /// λ̂_p, b1, pair tails for every overlap and the analytic rates.
    SteinChen,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Normal,
    Rademacher,
    Uniform,
    Exponential,
    T,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, value_enum)]
    what: What,
    /// Sample size n (observations).
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Dimension p (coordinates).
    #[arg(long, default_value_t = 50)]
    p: usize,
    /// Tensor order m.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Limit-law argument z; comma-separated for a grid under common random numbers.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    z: Vec<f64>,
    /// Population of every coordinate.
    #[arg(long, value_enum, default_value_t = FamilyArg::Normal)]
    family: FamilyArg,
    /// Degrees of freedom for `--family t` (must exceed 2).
    #[arg(long, default_value_t = 5)]
    df: u32,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Pair-tail level a (threshold a·√(n log p) on the raw sums).
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Shared coordinates s of the two tuples, 1 ≤ s < m.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Moderate-deviation point x (standard deviations).
    #[arg(long, default_value_t = 2.0)]
    x: f64,
    /// Replicates for each pair tail in the stein-chen report [default: --reps].
    #[arg(long)]
    psi_reps: Option<u64>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("point").required(true).args(["q", "z"]))]
struct QuantileArgs {
    /// Tensor order m.
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Side::Two)]
    sided: Side,
    /// Probability level in (0, 1); prints the quantile.
    #[arg(long)]
    q: Option<f64>,
    /// Point on the normalized scale; prints the CDF there.
    #[arg(long)]
    z: Option<f64>,
}

fn log_config(command: &str, config: &impl Serialize) {
    eprintln!(
        "maxtensor {command}: {}",
        serde_json::to_string(config).expect("config serializes")
    );
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("result serializes"));
}

/// Twelve significant digits in plain positional notation.
fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{v:.11e}");
    }
    format!("{v:.*}", (11 - magnitude).max(0) as usize)
}

fn family(args: &DiagnoseArgs) -> PopulationSpec {
    PopulationSpec::new(match args.family {
        FamilyArg::Normal => Family::StandardNormal,
        FamilyArg::Rademacher => Family::Rademacher,
        FamilyArg::Uniform => Family::UniformScaled,
        FamilyArg::Exponential => Family::CenteredExponential,
        FamilyArg::T => Family::StudentTStandardized { df: args.df },
    })
}

fn simulate(args: SimulateArgs, seed: Option<u64>) -> Result<()> {
    let mut config = ExperimentConfig::from_json_file(&args.config)?;
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(out) = args.output {
        config.output_path = Some(out);
    }
    log_config("simulate", &config);
    let report = run_experiment(&config)?;
    print_json(&json!({
        "output_path": config.output_path,
        "records": report.records.len(),
        "cells": report.cells,
    }));
    Ok(())
}

fn test(args: TestArgs) -> Result<()> {
    let opts = TestOptions::sided(args.sided.into());
    log_config(
        "test",
        &json!({"input": args.input, "m": args.m, "sided": Sidedness::from(args.sided), "studentize": args.studentize}),
    );
    let mut matrices = args
        .input
        .iter()
        .map(DataMatrix::read_csv)
        .collect::<Result<Vec<_>>>()?;
    if args.studentize {
        matrices = matrices.iter().map(DataMatrix::studentized).collect::<Result<_>>()?;
    }
    let result = if matrices.len() == 1 {
        test_independence(&matrices[0], args.m, &opts)?
    } else {
        test_independence_multi(&MultiSampleInput::new(matrices)?, &opts)?
    };
    print_json(&result);
    Ok(())
}

fn diagnose(args: DiagnoseArgs, seed: u64) -> Result<()> {
    let spec = family(&args);
    let seed = SeedSpec::new(seed, 0);
    log_config(
        "diagnose",
        &json!({
            "what": format!("{:?}", args.what).to_lowercase(),
            "n": args.n, "p": args.p, "m": args.m, "z": args.z, "spec": spec,
            "reps": args.reps, "threshold": args.threshold, "s": args.s, "x": args.x,
            "seed": seed,
        }),
    );
    match args.what {
        What::Lambda => print_json(&estimate_lambda_grid(&args.z, args.n, args.p, args.m, &spec, args.reps, seed)?),
        What::B1 => {
            let lambdas = estimate_lambda_grid(&args.z, args.n, args.p, args.m, &spec, args.reps, seed)?;
            let rows = lambdas
                .iter()
                .map(|l| Ok(json!({"lambda": l, "b1_bound": b1_bound(args.p, args.m, l.single_tail.probability)?})))
                .collect::<Result<Vec<_>>>()?;
            print_json(&rows);
        }
        What::Pairtail => {
            let pair = PairTailSpec {
                s: args.s,
                threshold: args.threshold,
                n: args.n,
                p: args.p,
                m: args.m,
                spec,
            };
            let est = estimate_pair_tail(&pair, args.reps, seed)?;
            print_json(&json!({"spec": pair, "cutoff": pair.cutoff(), "estimate": est}));
        }
        What::Mdr => print_json(&moderate_deviation_ratio(&spec, args.m, args.n, args.x, args.reps, seed)?),
        What::SteinChen => {
            let reports = args
                .z
                .iter()
                .map(|&z| {
                    stein_chen_report(
                        &SteinChenConfig {
                            z,
                            n: args.n,
                            p: args.p,
                            m: args.m,
                            spec: spec.clone(),
                            reps: args.reps,
                            psi_threshold: args.threshold,
                            psi_reps: args.psi_reps.unwrap_or(args.reps),
                        },
                        seed,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            print_json(&reports);
        }
    }
    Ok(())
}

fn quantile(args: QuantileArgs) -> Result<()> {
    let limit = GumbelLimit::new(args.m, args.sided.into())?;
    log_config("quantile", &json!({"m": args.m, "sided": limit.sided, "q": args.q, "z": args.z}));
    match (args.q, args.z) {
        (Some(q), _) => println!("{}", sig12(limit.quantile(q)?)),
        (None, Some(z)) => println!("{}", sig12(limit.cdf(z))),
        (None, None) => unreachable!("clap requires one of --q or --z"),
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Cell { source, .. } => exit_code(source),
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::Dimension(_) | Error::Parameter { .. } | Error::Domain(_) => EXIT_USAGE,
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .map_err(|e| Error::param("workers", e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(args) => simulate(args, cli.seed),
        Command::Test(args) => test(args),
        Command::Diagnose(args) => diagnose(args, cli.seed.unwrap_or(DEFAULT_MASTER_SEED)),
        Command::Quantile(args) => quantile(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
