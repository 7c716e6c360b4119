use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use ledgerfuzz::fuzzer::{replay, report_dir, BenchBudget};
use ledgerfuzz::{bench_mutators, fuzz, target, FuzzerConfig, MutatorConfig, MutatorSet, TARGET_NAMES};

const DEFAULT_MUTATORS: &str = "0,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18";

#[derive(Parser)]
#[command(
    name = "ledgerfuzz",
    version,
    about = "Coverage-guided fuzzer for key-value ledger smart contracts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fuzz loop until the budget is spent or interrupted.
    Fuzz(FuzzArgs),
    /// Replay one input and print the verdict, crash and final ledger state.
    Run(RunArgs),
    /// Fuzz once per mutation operator and print a comparison table.
    BenchMutators(BenchArgs),
    /// Summarize crashers and suppressions in a run directory.
    Report(ReportArgs),
    /// Print the registered target names.
    ListTargets,
}

#[derive(Args, Clone)]
struct Common {
    /// Target contract name.
    #[arg(long)]
    target: String,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run directory.
    #[arg(long, env = "LEDGERFUZZ_DIR", default_value = "ledgerfuzz-out")]
    dir: PathBuf,
    /// Per-execution timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    exec_timeout_secs: f64,
    /// Maximum input length in bytes.
    #[arg(long, default_value_t = 4096)]
    max_input_len: usize,
    /// Maximum number of stacked operators per mutation.
    #[arg(long, default_value_t = 4)]
    stack_max: usize,
    /// Random typed inputs added to the seed corpus.
    #[arg(long, default_value_t = FuzzerConfig::DEFAULT_N_RANDOM)]
    n_random: usize,
}

#[derive(Args)]
struct FuzzArgs {
    #[command(flatten)]
    common: Common,
    /// Enabled mutation operators: `all` or comma-separated ids.
    #[arg(long, default_value = DEFAULT_MUTATORS)]
    mutators: String,
    /// Stop after this many executions [default: unlimited].
    #[arg(long)]
    budget_execs: Option<u64>,
    /// Stop after this many seconds [default: unlimited].
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Worker threads. Runs are reproducible only with one worker.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seconds between stats lines.
    #[arg(long, default_value_t = 3.0)]
    stats_interval_secs: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Target contract name.
    #[arg(long)]
    target: String,
    /// Per-execution timeout in seconds.
    #[arg(long, default_value_t = 10.0)]
    exec_timeout_secs: f64,
    /// Input file to replay.
    file: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Wall-clock budget per operator in seconds.
    #[arg(
        long,
        conflicts_with = "per_op_execs",
        required_unless_present = "per_op_execs"
    )]
    per_op_secs: Option<f64>,
    /// Execution budget per operator.
    #[arg(long)]
    per_op_execs: Option<u64>,
    /// Also write the report as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory.
    #[arg(long, env = "LEDGERFUZZ_DIR", default_value = "ledgerfuzz-out")]
    dir: PathBuf,
}

enum Failure {
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn secs(value: f64, flag: &str) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(value)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| Failure::Usage(format!("--{flag} must be a positive number of seconds")))
}

fn config(common: &Common, mutators: &str) -> Result<FuzzerConfig, Failure> {
    target(&common.target)?;
    let set: MutatorSet = mutators.parse()?;
    let mut config = FuzzerConfig::new(&common.target, &common.dir);
    config.seed = common.seed;
    config.mutators = MutatorConfig::new(set.ids().iter().copied(), common.max_input_len, common.stack_max)?;
    config.exec_timeout = secs(common.exec_timeout_secs, "exec-timeout-secs")?;
    config.n_random = common.n_random;
    Ok(config)
}

fn stop_flag() -> Result<Arc<AtomicBool>, Failure> {
    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))?;
    Ok(stop)
}

fn cmd_fuzz(args: FuzzArgs) -> Result<ExitCode, Failure> {
    let mut config = config(&args.common, &args.mutators)?;
    config.budget_execs = args.budget_execs;
    config.budget_time = args.budget_secs.map(|s| secs(s, "budget-secs")).transpose()?;
    config.workers = args.workers;
    config.stats_interval = secs(args.stats_interval_secs, "stats-interval-secs")?;
    config.validate()?;

    let stop = stop_flag()?;
    let summary = fuzz(&config, &stop, &mut |snap| println!("{snap}"))?;
    if stop.load(Ordering::SeqCst) {
        println!("interrupted");
    }
    for found in &summary.new_signatures {
        println!(
            "new crash after {} ms: {} {} {}",
            found.found_at.as_millis(),
            found.kind,
            &found.signature[..16],
            found.message
        );
    }
    println!(
        "done: {} new crash signature(s), results in {}",
        summary.new_signatures.len(),
        config.dir.display()
    );
    Ok(if summary.new_signatures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let spec = target(&args.target)?;
    let timeout = secs(args.exec_timeout_secs, "exec-timeout-secs")?;
    let input = fs::read(&args.file).map_err(|e| Failure::Usage(format!("{}: {e}", args.file.display())))?;
    let (result, ledger) = replay(&input, &spec, timeout);
    println!("input: {}", ledgerfuzz::corpus::quote(&input));
    let code = match (&result.verdict, &result.crash) {
        (_, Some(crash)) => {
            println!("crash: {}", crash.kind);
            println!("signature: {}", crash.signature);
            println!("message: {}", crash.message);
            ExitCode::from(1)
        }
        (Some(verdict), None) => {
            println!("verdict: {}", verdict.code());
            ExitCode::SUCCESS
        }
        (None, None) => unreachable!("execution result has neither verdict nor crash"),
    };
    println!("cover: {}", result.run_coverage.cover_count());
    println!("state:");
    print!("{}", ledger.dump());
    Ok(code)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Failure> {
    let config = config(&args.common, DEFAULT_MUTATORS)?;
    let budget = match (args.per_op_secs, args.per_op_execs) {
        (Some(s), _) => BenchBudget::Time(secs(s, "per-op-secs")?),
        (None, Some(0)) => return Err(Failure::Usage("--per-op-execs must be positive".into())),
        (None, Some(n)) => BenchBudget::Execs(n),
        (None, None) => {
            return Err(Failure::Usage(
                "one of --per-op-secs or --per-op-execs is required".into(),
            ))
        }
    };
    let stop = stop_flag()?;
    let report = bench_mutators(&config, budget, &stop)?;
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv());
    if let Some(path) = &args.csv {
        fs::write(path, report.to_csv()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Failure> {
    let report = report_dir(&args.dir)?;
    println!("corpus: {}", report.corpus);
    println!(
        "crashers: {} ({} files)",
        report.crashers.len(),
        report.crasher_files
    );
    for crasher in &report.crashers {
        println!(
            "  {} {} {}",
            &crasher.hash[..16.min(crasher.hash.len())],
            crasher.kind,
            crasher.message
        );
        println!("    input: {}", crasher.quoted);
    }
    println!("suppressions: {}", report.suppressions.len());
    for (signature, message) in &report.suppressions {
        println!("  {} {}", &signature[..16.min(signature.len())], message);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fuzz(args) => cmd_fuzz(args),
        Command::Run(args) => cmd_run(args),
        Command::BenchMutators(args) => cmd_bench(args),
        Command::Report(args) => cmd_report(args),
        Command::ListTargets => {
            for name in TARGET_NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
