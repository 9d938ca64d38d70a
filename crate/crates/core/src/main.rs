use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sentinel_core::clustering::{TriggerConfig, DEFAULT_M_MAX};
use sentinel_core::error::Error;
use sentinel_core::explain::Modality;
use sentinel_core::labeling::{bench_cover, CoverMethod};
use sentinel_core::report::{run_pipeline, RunOptions};
use sentinel_core::rollout::DEFAULT_ROLLOUTS;
use sentinel_core::scenario::load_scenario;

const THREADS_ENV: &str = "SENTINEL_THREADS";

#[derive(Parser)]
#[command(name = "sentinel", version, about = "Failure-mode identification and handover explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample rollouts, cluster returns, label failure modes and write a JSON report.
    Run(RunArgs),
    /// Time Petrick's method against the set-cover IP on random instances.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModalityArg {
    A,
    B1,
    B2,
    B3,
    B4,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Qm,
    Ilp,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ROLLOUTS, value_parser = positive)]
    rollouts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "all")]
    modality: ModalityArg,
    #[arg(long, default_value_t = TriggerConfig::default().p_min)]
    p_min: f64,
    #[arg(long, default_value_t = TriggerConfig::default().r_fail, allow_negative_numbers = true)]
    r_fail: f64,
    #[arg(long, default_value_t = DEFAULT_M_MAX, value_parser = positive)]
    m_max: usize,
    #[arg(long, value_enum, default_value = "ilp")]
    method: MethodArg,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 14)]
    predicates: usize,
    #[arg(long, default_value_t = 60)]
    targets: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let trigger = match TriggerConfig::new(args.p_min, args.r_fail) {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    let scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("{}: {e}", args.scenario.display())),
    };
    let modalities = match args.modality {
        ModalityArg::A => vec![Modality::Generic],
        ModalityArg::B1 => vec![Modality::ObjectOnly],
        ModalityArg::B2 => vec![Modality::DirectionOnly],
        ModalityArg::B3 => vec![Modality::ObjectDirection],
        ModalityArg::B4 => vec![Modality::FullSentence],
        ModalityArg::All => Modality::ALL.to_vec(),
    };
    let opts = RunOptions {
        scenario_path: args.scenario.display().to_string(),
        rollouts: args.rollouts,
        seed: args.seed,
        modalities,
        trigger,
        m_max: args.m_max,
        method: match args.method {
            MethodArg::Qm => CoverMethod::QmPetrick,
            MethodArg::Ilp => CoverMethod::Ilp,
        },
        threads,
    };

    let outcome = match run_pipeline(&scenario, &opts) {
        Ok(o) => o,
        Err(e @ Error::Scenario(_)) => return usage_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for id in &outcome.ambiguous_clusters {
        eprintln!("warning: flagged cluster {id} has no unambiguous failure minterm; left unlabeled");
    }

    let text = outcome.report_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    if outcome.all_flagged_ambiguous() {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn fmt_secs(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |s| format!("{s:.6}"))
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    let report = match bench_cover(args.predicates, args.targets, args.trials, args.seed) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    println!(
        "bench: predicates={} targets={} trials={} seed={}",
        args.predicates, args.targets, args.trials, args.seed
    );
    println!("{:<8} {:>12} {:>12}", "method", "median_s", "mean_s");
    if report.trials.is_empty() {
        return ExitCode::SUCCESS;
    }
    println!("{:<8} {:>12} {:>12}", "petrick", fmt_secs(report.petrick_median()), fmt_secs(report.petrick_mean()));
    println!("{:<8} {:>12} {:>12}", "ilp", fmt_secs(report.ilp_median()), fmt_secs(report.ilp_mean()));
    if report.timeouts() > 0 {
        println!("petrick term limit hit: {} of {} trials", report.timeouts(), report.trials.len());
    }
    println!("costs equal: {}", report.costs_equal());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
