//! `mfmab`: run multi-fidelity bandit experiments from the command line.
//!
//! Exit status is 0 on success, 1 when an instance, plan or argument fails
//! validation, and 2 for any other failure. Log verbosity follows the
//! `MFMAB_LOG` environment variable (`warn` by default).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing::{info, warn};
use tracing_subscriber::EnvFilter;

use mfmab_core::bai::{min_confidence_factor, Procedure};
use mfmab_core::bounds::bound_report;
use mfmab_core::harness::{
    run_sweep_on, scaling_fit, write_csv, write_csv_file, ExperimentPlan, Mode, SummaryRecord,
    SweepOptions, SweepOutput,
};
use mfmab_core::regret::default_epsilon;
use mfmab_core::{Error, Instance, PriorMeans, RewardDistribution};

#[derive(Parser)]
#[command(
    name = "mfmab",
    version,
    about = "Multi-fidelity multi-armed bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print its canonical arm order.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Evaluate hardness measures and bound expressions.
    Bounds(BoundsArgs),
    /// Monte-Carlo best-arm identification trials.
    Bai(BaiArgs),
    /// Monte-Carlo regret minimization trials.
    Regret(RegretArgs),
    /// Run an experiment plan file.
    Sweep {
        #[arg(long)]
        plan: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone)]
struct LoadArgs {
    /// Accept instances whose means break the error bounds (with a warning).
    #[arg(long)]
    lenient: bool,
    /// Override the reward distribution given in the instance file.
    #[arg(long, value_enum)]
    distribution: Option<Distribution>,
}

#[derive(Args, Clone, Copy)]
struct RunArgs {
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Record wall time per trial (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Clone, Copy)]
struct PriorArgs {
    #[arg(long, requires = "mu2_tilde")]
    mu1_tilde: Option<f64>,
    #[arg(long, requires = "mu1_tilde")]
    mu2_tilde: Option<f64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    delta: f64,
    /// Budget for the regret bounds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, requires = "budget")]
    epsilon: Option<f64>,
    /// Confidence factor L (default 4KM).
    #[arg(long)]
    confidence_factor: Option<f64>,
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct BaiArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = parse_procedure)]
    procedure: Procedure,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    prior: PriorArgs,
    #[arg(long)]
    confidence_factor: Option<f64>,
    #[arg(long)]
    max_pulls: Option<u64>,
    /// Per-trial CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    load: LoadArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    budget: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    load: LoadArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Distribution {
    Bernoulli,
    Deterministic,
}

impl From<Distribution> for RewardDistribution {
    fn from(d: Distribution) -> Self {
        match d {
            Distribution::Bernoulli => RewardDistribution::Bernoulli,
            Distribution::Deterministic => RewardDistribution::Deterministic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_procedure(s: &str) -> Result<Procedure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_env("MFMAB_LOG").unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Structural(_) | Error::Invalid(_) | Error::Parse { .. } | Error::Parameter(_) => 1,
        _ => 2,
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Validate { instance, load } => validate(&instance, &load),
        Command::Bounds(args) => bounds(args),
        Command::Bai(args) => bai(args),
        Command::Regret(args) => regret(args),
        Command::Sweep { plan, out, run } => sweep(&plan, &out, run),
    }
}

fn base_plan(mode: Mode, instance: &Path, load: &LoadArgs) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(mode, instance);
    plan.lenient = load.lenient;
    plan.distribution = load.distribution.map(Into::into);
    plan
}

fn load(plan: &ExperimentPlan) -> Result<Instance, Error> {
    let inst = plan.load_instance()?;
    for w in inst.warnings() {
        warn!("{w}");
    }
    Ok(inst)
}

fn validate(path: &Path, args: &LoadArgs) -> Result<(), Error> {
    let inst = load(&base_plan(Mode::Validate, path, args))?;
    println!(
        "ok: {} arms, {} fidelities, {:?} rewards",
        inst.num_arms(),
        inst.num_fidelities(),
        inst.distribution()
    );
    let order: Vec<String> = inst
        .original_indices()
        .iter()
        .map(|k| (k + 1).to_string())
        .collect();
    println!("arms by decreasing top-fidelity mean: {}", order.join(" "));
    for w in inst.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}

fn prior_of(p: PriorArgs) -> Result<PriorMeans, Error> {
    match (p.mu1_tilde, p.mu2_tilde) {
        (Some(a), Some(b)) => PriorMeans::new(a, b),
        _ => Ok(PriorMeans::DEFAULT),
    }
}

fn bounds(args: BoundsArgs) -> Result<(), Error> {
    let inst = load(&base_plan(Mode::Bounds, &args.instance, &args.load))?;
    let prior = prior_of(args.prior)?;
    let factor = args
        .confidence_factor
        .unwrap_or_else(|| min_confidence_factor(&inst));
    let regret = args.budget.map(|b| {
        (
            b,
            args.epsilon
                .unwrap_or_else(|| default_epsilon(inst.num_arms(), b)),
        )
    });
    let report = bound_report(&inst, &prior, args.delta, factor, regret)?;

    let mut buf = Vec::new();
    match args.format {
        Format::Csv => write_csv(&mut buf, &report.csv_rows())?,
        Format::Json => {
            buf = serde_json::to_vec_pretty(&report).expect("report serializes");
            buf.push(b'\n');
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, &buf).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(())
}

fn bai(args: BaiArgs) -> Result<(), Error> {
    let mut plan = base_plan(Mode::Bai, &args.instance, &args.load);
    plan.trials = args.trials;
    plan.master_seed = args.seed;
    plan.deltas = vec![args.delta];
    plan.procedures = vec![args.procedure];
    plan.mu1_tilde = args.prior.mu1_tilde;
    plan.mu2_tilde = args.prior.mu2_tilde;
    plan.confidence_factor = args.confidence_factor;
    plan.max_pulls = args.max_pulls;
    let out = execute(&plan, args.run)?;
    write_csv_file(&args.out, &out.records)?;
    print_summaries(&out.summaries);
    Ok(())
}

fn regret(args: RegretArgs) -> Result<(), Error> {
    let mut plan = base_plan(Mode::Regret, &args.instance, &args.load);
    plan.trials = args.trials;
    plan.master_seed = args.seed;
    plan.budgets = vec![args.budget];
    plan.epsilon = args.epsilon;
    let out = execute(&plan, args.run)?;
    write_csv_file(&args.out, &out.records)?;
    print_summaries(&out.summaries);
    Ok(())
}

fn execute(plan: &ExperimentPlan, run: RunArgs) -> Result<SweepOutput, Error> {
    plan.validate()?;
    let inst = load(plan)?;
    let opts = SweepOptions {
        workers: run.workers,
        timing: run.timing,
    };
    run_sweep_on(plan, &inst, opts)
}

fn print_summaries(summaries: &[SummaryRecord]) {
    let mut buf = Vec::new();
    write_csv(&mut buf, summaries).expect("in-memory write");
    print!("{}", String::from_utf8_lossy(&buf));
}

fn sweep(plan_path: &Path, out: &Path, run: RunArgs) -> Result<(), Error> {
    let plan = ExperimentPlan::load(plan_path)?;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    match plan.mode {
        Mode::Validate => validate(
            &plan.instance,
            &LoadArgs {
                lenient: plan.lenient,
                distribution: None,
            },
        ),
        Mode::Bounds => {
            let inst = load(&plan)?;
            let prior = plan.prior()?;
            let factor = plan
                .confidence_factor
                .unwrap_or_else(|| min_confidence_factor(&inst));
            let budgets: Vec<Option<f64>> = if plan.budgets.is_empty() {
                vec![None]
            } else {
                plan.budgets.iter().copied().map(Some).collect()
            };
            let mut n = 0;
            for &delta in &plan.deltas {
                for budget in &budgets {
                    let regret = budget.map(|b| {
                        (
                            b,
                            plan.epsilon
                                .unwrap_or_else(|| default_epsilon(inst.num_arms(), b)),
                        )
                    });
                    let report = bound_report(&inst, &prior, delta, factor, regret)?;
                    write_csv_file(out.join(format!("bounds_{n}.csv")), &report.csv_rows())?;
                    n += 1;
                }
            }
            info!(files = n, "wrote bound reports");
            Ok(())
        }
        Mode::Bai | Mode::Regret => {
            let result = execute(&plan, run)?;
            write_csv_file(out.join("trials.csv"), &result.records)?;
            write_csv_file(out.join("summary.csv"), &result.summaries)?;
            if plan.mode == Mode::Regret && plan.budgets.len() >= 3 {
                match scaling_fit(&result.summaries) {
                    Ok(fit) => {
                        let path = out.join("scaling_fit.json");
                        let text = serde_json::to_string_pretty(&fit).expect("fit serializes");
                        std::fs::write(&path, text + "\n")
                            .map_err(|source| Error::Io { path, source })?;
                        println!("slope {:.4} (R^2 {:.4})", fit.slope, fit.r_squared);
                    }
                    Err(e) => warn!("no scaling fit: {e}"),
                }
            }
            print_summaries(&result.summaries);
            Ok(())
        }
    }
}
