//! The genetic fuzz loop, single-input execution and the per-operator
//! benchmark.

use std::any::Any;
use std::cell::Cell;
use std::fmt::Write as _;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Mutex, Once};
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contract::DeadlineExceeded;
use crate::corpus::{sorted_files, AddCause, CorpusStore, CrashKind, CrashReport, Outcome};
use crate::coverage::{is_new_coverage, CoverageMap};
use crate::error::{Error, Result};
use crate::harness::{decode, gen_seed_corpus, run_group, Decoded, HarnessVerdict, UuidSource};
use crate::ledger::{CallEnv, MockLedger};
use crate::mutation::{mutate, Dictionary, MutatorConfig, MutatorId};
use crate::targets::{target, TargetSpec};

#[derive(Debug, Clone)]
pub struct FuzzerConfig {
    pub target: String,
    pub seed: u64,
    pub mutators: MutatorConfig,
    /// Stop after this many executions. Seed executions are not counted.
    pub budget_execs: Option<u64>,
    pub budget_time: Option<Duration>,
    pub exec_timeout: Duration,
    pub stats_interval: Duration,
    pub workers: usize,
    /// Run directory holding `corpus/`, `crashers/` and `suppressions/`.
    pub dir: PathBuf,
    /// Random typed frames added to the seed corpus.
    pub n_random: usize,
}

impl FuzzerConfig {
    pub const DEFAULT_EXEC_TIMEOUT: Duration = Duration::from_secs(10);
    pub const DEFAULT_STATS_INTERVAL: Duration = Duration::from_secs(3);
    pub const DEFAULT_N_RANDOM: usize = 16;

    pub fn new(target: impl Into<String>, dir: impl Into<PathBuf>) -> Self {
        Self {
            target: target.into(),
            seed: 0,
            mutators: MutatorConfig::default(),
            budget_execs: None,
            budget_time: None,
            exec_timeout: Self::DEFAULT_EXEC_TIMEOUT,
            stats_interval: Self::DEFAULT_STATS_INTERVAL,
            workers: 1,
            dir: dir.into(),
            n_random: Self::DEFAULT_N_RANDOM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.budget_time == Some(Duration::ZERO) {
            return Err(Error::Config("time budget must be positive".into()));
        }
        if self.exec_timeout.is_zero() {
            return Err(Error::Config("exec timeout must be positive".into()));
        }
        if self.stats_interval.is_zero() {
            return Err(Error::Config("stats interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSnapshot {
    pub elapsed: Duration,
    pub corpus: usize,
    pub execs: u64,
    pub execs_per_sec: f64,
    pub cover: usize,
    pub crashers: usize,
}

impl std::fmt::Display for StatsSnapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}s: corpus: {}, execs: {} ({:.0}/sec), cover: {}, crashers: {}",
            self.elapsed.as_secs(),
            self.corpus,
            self.execs,
            self.execs_per_sec,
            self.cover,
            self.crashers
        )
    }
}

/// Outcome of one execution: a verdict for a completed run, or a crash.
#[derive(Debug, Clone)]
pub struct ExecResult {
    pub verdict: Option<HarnessVerdict>,
    pub crash: Option<CrashReport>,
    pub run_coverage: CoverageMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Executed {
    Clean(HarnessVerdict),
    Crash(CrashKind, String),
}

thread_local! {
    static QUIET_PANICS: Cell<bool> = const { Cell::new(false) };
}

static QUIET_HOOK: Once = Once::new();

/// Wraps the process panic hook so that panics raised while a contract runs
/// under the harness are not printed.
fn install_quiet_hook() {
    QUIET_HOOK.call_once(|| {
        let previous = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            if !QUIET_PANICS.with(Cell::get) {
                previous(info);
            }
        }));
    });
}

fn panic_message(payload: &(dyn Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "contract aborted with a non-text payload".to_owned()
    }
}

/// Runs `input` against a fresh ledger. Coverage accumulates into
/// `coverage`, which is cleared when the execution times out.
fn execute_into(
    input: &[u8],
    spec: &TargetSpec,
    exec_timeout: Duration,
    coverage: &mut CoverageMap,
) -> (Executed, MockLedger) {
    install_quiet_hook();
    coverage.reset();
    let mut ledger = MockLedger::new();
    let deadline = Instant::now().checked_add(exec_timeout);

    QUIET_PANICS.with(|q| q.set(true));
    let caught = panic::catch_unwind(AssertUnwindSafe(
        || -> std::result::Result<HarnessVerdict, String> {
            let init = ledger
                .mock_init_with(
                    "init",
                    &spec.fixture,
                    spec.contract.as_ref(),
                    CallEnv { coverage, deadline },
                )
                .expect("fresh ledger accepts init");
            debug_assert!(init.is_ok(), "fixture rejected: {}", init.message);
            let Decoded::Call { group, params } = decode(input, &spec.groups) else {
                return Ok(HarnessVerdict::Clean);
            };
            let mut uuids = UuidSource::new();
            let run = run_group(
                &mut ledger,
                spec.contract.as_ref(),
                &spec.groups[group],
                &params,
                &mut uuids,
                coverage,
                deadline,
            );
            match run.mismatch {
                Some(message) => Err(message),
                None => Ok(run.verdict),
            }
        },
    ));
    QUIET_PANICS.with(|q| q.set(false));

    let executed = match caught {
        Ok(Ok(verdict)) => Executed::Clean(verdict),
        Ok(Err(message)) => Executed::Crash(CrashKind::OracleMismatch, message),
        Err(payload) if payload.is::<DeadlineExceeded>() => {
            coverage.reset();
            Executed::Crash(
                CrashKind::Timeout,
                format!("execution exceeded {} ms", exec_timeout.as_millis()),
            )
        }
        Err(payload) => Executed::Crash(CrashKind::Abort, panic_message(payload.as_ref())),
    };
    (executed, ledger)
}

fn to_result(input: &[u8], executed: Executed, run_coverage: CoverageMap, found_at: Duration) -> ExecResult {
    match executed {
        Executed::Clean(verdict) => ExecResult {
            verdict: Some(verdict),
            crash: None,
            run_coverage,
        },
        Executed::Crash(kind, message) => ExecResult {
            verdict: None,
            crash: Some(CrashReport::new(input.to_vec(), kind, message, found_at)),
            run_coverage,
        },
    }
}

/// Executes one input on a fresh ledger built from the target fixture. No
/// failure escapes: aborts, timeouts and oracle mismatches all become crash
/// reports.
pub fn execute_one(input: &[u8], spec: &TargetSpec, exec_timeout: Duration) -> ExecResult {
    replay(input, spec, exec_timeout).0
}

/// Like [`execute_one`], also returning the ledger as the execution left it.
pub fn replay(input: &[u8], spec: &TargetSpec, exec_timeout: Duration) -> (ExecResult, MockLedger) {
    let mut coverage = CoverageMap::new();
    let (executed, ledger) = execute_into(input, spec, exec_timeout, &mut coverage);
    (to_result(input, executed, coverage, Duration::ZERO), ledger)
}

/// A crash signature first seen during a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundSignature {
    pub signature: String,
    pub kind: CrashKind,
    pub message: String,
    pub found_at: Duration,
    /// Executions completed when the crash was found; 0 for seeds.
    pub found_at_exec: u64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_stats: StatsSnapshot,
    /// Every snapshot emitted during the run, final one included.
    pub snapshots: Vec<StatsSnapshot>,
    /// Signatures not suppressed when the run started, in order of discovery.
    pub new_signatures: Vec<FoundSignature>,
    pub seed_count: usize,
}

struct Shared {
    store: CorpusStore,
    global: CoverageMap,
    found: Vec<FoundSignature>,
}

struct Counters {
    execs: AtomicU64,
    corpus: AtomicU64,
    cover: AtomicU64,
    crashers: AtomicU64,
}

impl Counters {
    fn publish(&self, shared: &Shared) {
        self.corpus.store(shared.store.len() as u64, Ordering::Relaxed);
        self.cover
            .store(shared.global.cover_count() as u64, Ordering::Relaxed);
        self.crashers
            .store(shared.store.suppression_count() as u64, Ordering::Relaxed);
    }

    fn snapshot(&self, elapsed: Duration) -> StatsSnapshot {
        let execs = self.execs.load(Ordering::Relaxed);
        let secs = elapsed.as_secs_f64();
        StatsSnapshot {
            elapsed,
            corpus: self.corpus.load(Ordering::Relaxed) as usize,
            execs,
            execs_per_sec: if secs > 0.0 { execs as f64 / secs } else { 0.0 },
            cover: self.cover.load(Ordering::Relaxed) as usize,
            crashers: self.crashers.load(Ordering::Relaxed) as usize,
        }
    }
}

fn build_dictionary(spec: &TargetSpec) -> Dictionary {
    let mut dict = Dictionary::from_literals(spec.contract.literals());
    for case in &spec.seeds {
        for arg in &case.args {
            dict.insert(arg);
        }
    }
    for arg in &spec.fixture {
        dict.insert(arg);
    }
    for group in &spec.groups {
        dict.insert(group.publish_fn.as_bytes());
        dict.insert(group.query_fn.as_bytes());
    }
    dict
}

/// Records a crash, returning the signature entry when it is new.
fn record(shared: &mut Shared, report: &CrashReport, execs: u64) -> Result<bool> {
    if !shared.store.record_crash(report)? {
        return Ok(false);
    }
    shared.found.push(FoundSignature {
        signature: report.signature.clone(),
        kind: report.kind,
        message: report.message.clone(),
        found_at: report.found_at,
        found_at_exec: execs,
    });
    Ok(true)
}

/// Runs the fuzz loop until the budget is spent or `stop` is set.
/// `on_stats` receives every periodic snapshot and the final one.
pub fn fuzz(
    config: &FuzzerConfig,
    stop: &AtomicBool,
    on_stats: &mut (dyn FnMut(&StatsSnapshot) + Send),
) -> Result<RunSummary> {
    config.validate()?;
    let spec = target(&config.target)?;
    check_fixture(&spec)?;
    let store = CorpusStore::open(&config.dir, config.mutators.max_input_len)?;
    let start = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds = gen_seed_corpus(&spec.groups, &spec.seeds, &mut rng, config.n_random)?;
    let dict = build_dictionary(&spec);

    let mut shared = Shared {
        store,
        global: CoverageMap::new(),
        found: Vec::new(),
    };

    // Replay what is already stored, then the fresh seeds.
    let mut run_cov = CoverageMap::new();
    let stored: Vec<Vec<u8>> = shared.store.entries().iter().map(|e| e.data.clone()).collect();
    for data in stored.iter().chain(seeds.iter()) {
        let (executed, _) = execute_into(data, &spec, config.exec_timeout, &mut run_cov);
        is_new_coverage(&mut shared.global, &run_cov);
        if let Executed::Crash(kind, message) = executed {
            let report = CrashReport::new(data.clone(), kind, message, start.elapsed());
            record(&mut shared, &report, 0)?;
        }
        let mut seed = data.clone();
        seed.truncate(config.mutators.max_input_len);
        shared.store.add_entry(seed, AddCause::Seed, None, None)?;
    }
    let seed_count = shared.store.len();

    let counters = Counters {
        execs: AtomicU64::new(0),
        corpus: AtomicU64::new(0),
        cover: AtomicU64::new(0),
        crashers: AtomicU64::new(0),
    };
    counters.publish(&shared);
    let shared = Mutex::new(shared);
    let done = AtomicBool::new(false);
    let mut snapshots = Vec::new();
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    thread::scope(|scope| {
        let workers: Vec<_> = (0..config.workers)
            .map(|w| {
                let mut rng = if w == 0 {
                    rng.clone()
                } else {
                    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
                    r.set_stream(w as u64);
                    r
                };
                let (shared, counters, dict, spec, done) = (&shared, &counters, &dict, &spec, &done);
                let first_error = &first_error;
                scope.spawn(move || {
                    let result =
                        worker_loop(config, spec, dict, shared, counters, &mut rng, stop, done, start);
                    if let Err(e) = result {
                        first_error.lock().unwrap().get_or_insert(e);
                        done.store(true, Ordering::Relaxed);
                    }
                })
            })
            .collect();

        let mut next_report = config.stats_interval;
        while workers.iter().any(|h| !h.is_finished()) {
            thread::sleep(Duration::from_millis(10).min(config.stats_interval));
            let elapsed = start.elapsed();
            if elapsed >= next_report {
                let snap = counters.snapshot(elapsed);
                on_stats(&snap);
                snapshots.push(snap);
                next_report += config.stats_interval;
            }
        }
        for handle in workers {
            if let Err(panic) = handle.join() {
                panic::resume_unwind(panic);
            }
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let shared = shared.into_inner().unwrap();
    counters.publish(&shared);
    let final_stats = counters.snapshot(start.elapsed());
    on_stats(&final_stats);
    snapshots.push(final_stats);
    Ok(RunSummary {
        final_stats,
        snapshots,
        new_signatures: shared.found,
        seed_count,
    })
}

fn check_fixture(spec: &TargetSpec) -> Result<()> {
    let mut ledger = MockLedger::new();
    let resp = ledger.mock_init("init", &spec.fixture, spec.contract.as_ref())?;
    if !resp.is_ok() {
        return Err(Error::Config(format!(
            "target {} rejected its fixture: {}",
            spec.name(),
            resp.message
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn worker_loop(
    config: &FuzzerConfig,
    spec: &TargetSpec,
    dict: &Dictionary,
    shared: &Mutex<Shared>,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
    stop: &AtomicBool,
    done: &AtomicBool,
    start: Instant,
) -> Result<()> {
    let mut run_cov = CoverageMap::new();
    loop {
        if stop.load(Ordering::Relaxed) || done.load(Ordering::Relaxed) {
            return Ok(());
        }
        if config.budget_time.is_some_and(|t| start.elapsed() >= t) {
            done.store(true, Ordering::Relaxed);
            return Ok(());
        }
        let exec_no = counters.execs.fetch_add(1, Ordering::Relaxed) + 1;
        if config.budget_execs.is_some_and(|b| exec_no > b) {
            counters.execs.fetch_sub(1, Ordering::Relaxed);
            done.store(true, Ordering::Relaxed);
            return Ok(());
        }

        let (parent, child) = {
            let mut guard = shared.lock().unwrap();
            let parent = guard.store.pick(rng);
            let store = &guard.store;
            let child = mutate(
                &store.entry(parent).data,
                rng,
                &mut |r: &mut ChaCha8Rng| store.random_data(r).map(<[u8]>::to_vec),
                dict,
                &config.mutators,
            );
            (parent, child)
        };

        let (executed, _) = execute_into(&child, spec, config.exec_timeout, &mut run_cov);

        let mut guard = shared.lock().unwrap();
        let shared = &mut *guard;
        let new_cov = is_new_coverage(&mut shared.global, &run_cov);
        let source_op = last_operator(&config.mutators);
        let outcome = match executed {
            Executed::Clean(_) => {
                if new_cov {
                    shared
                        .store
                        .add_entry(child, AddCause::NewCoverage, Some(parent), source_op)?;
                    Outcome::NewCoverage
                } else {
                    Outcome::Nothing
                }
            }
            Executed::Crash(kind, message) => {
                let report = CrashReport::new(child, kind, message, start.elapsed());
                let fresh = record(shared, &report, exec_no)?;
                if kind == CrashKind::OracleMismatch && (fresh || new_cov) {
                    let cause = if new_cov {
                        AddCause::NewCoverage
                    } else {
                        AddCause::OracleSuspect
                    };
                    shared
                        .store
                        .add_entry(report.data, cause, Some(parent), source_op)?;
                }
                if new_cov {
                    Outcome::NewCoverage
                } else {
                    Outcome::Suspect
                }
            }
        };
        shared.store.reward(parent, outcome);
        counters.publish(shared);
    }
}

/// The operator recorded as an entry's source: only meaningful when a single
/// operator is enabled.
fn last_operator(config: &MutatorConfig) -> Option<MutatorId> {
    match config.enabled() {
        [only] => Some(*only),
        _ => None,
    }
}

/// Per-operator budget for [`bench_mutators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchBudget {
    Time(Duration),
    Execs(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub id: MutatorId,
    pub corpus: usize,
    pub execs: u64,
    pub cover: usize,
    pub time1: Option<Duration>,
    pub time2: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// `1m6s` style, sub-minute values with one decimal.
pub fn format_duration(d: Duration) -> String {
    let secs = d.as_secs_f64();
    if secs < 60.0 {
        format!("{secs:.1}s")
    } else {
        let whole = d.as_secs();
        let (h, m, s) = (whole / 3600, whole / 60 % 60, whole % 60);
        if h > 0 {
            format!("{h}h{m}m{s}s")
        } else {
            format!("{m}m{s}s")
        }
    }
}

impl BenchReport {
    pub const HEADER: [&'static str; 6] = ["ID", "corpus", "execs", "cover", "time-1", "time-2"];
    pub const NOT_FOUND: &'static str = "—";

    fn cells(row: &BenchRow) -> [String; 6] {
        let time = |t: Option<Duration>| t.map_or_else(|| Self::NOT_FOUND.to_owned(), format_duration);
        [
            row.id.get().to_string(),
            row.corpus.to_string(),
            row.execs.to_string(),
            row.cover.to_string(),
            time(row.time1),
            time(row.time2),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut table = vec![Self::HEADER.map(str::to_owned)];
        table.extend(self.rows.iter().map(Self::cells));
        let mut widths = [0usize; 6];
        for line in &table {
            for (w, cell) in widths.iter_mut().zip(line) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for line in &table {
            let mut text = String::new();
            for (i, (cell, w)) in line.iter().zip(widths).enumerate() {
                if i > 0 {
                    text.push_str("  ");
                }
                let pad = w - cell.chars().count();
                text.push_str(&" ".repeat(pad));
                text.push_str(cell);
            }
            out.push_str(&text);
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let ms = |t: Option<Duration>| t.map(|d| d.as_millis().to_string()).unwrap_or_default();
        let mut out = String::from("id,corpus,execs,cover,time1_ms,time2_ms\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.id.get(),
                row.corpus,
                row.execs,
                row.cover,
                ms(row.time1),
                ms(row.time2)
            );
        }
        out
    }
}

/// Fuzzes the target once per operator, each time with only that operator
/// enabled and a fresh directory under `<dir>/bench/<id>`.
pub fn bench_mutators(config: &FuzzerConfig, budget: BenchBudget, stop: &AtomicBool) -> Result<BenchReport> {
    match budget {
        BenchBudget::Time(t) if t.is_zero() => {
            return Err(Error::Config("per-operator budget must be positive".into()))
        }
        BenchBudget::Execs(0) => return Err(Error::Config("per-operator budget must be positive".into())),
        _ => {}
    }
    let mut rows = Vec::with_capacity(MutatorId::COUNT as usize);
    for id in MutatorId::all() {
        let dir = config.dir.join("bench").join(id.get().to_string());
        remove_run_dir(&dir)?;
        let mut run = config.clone();
        run.mutators = MutatorConfig::new([id], config.mutators.max_input_len, config.mutators.stack_max)?;
        run.dir = dir;
        run.budget_execs = None;
        run.budget_time = None;
        match budget {
            BenchBudget::Time(t) => run.budget_time = Some(t),
            BenchBudget::Execs(n) => run.budget_execs = Some(n),
        }
        run.stats_interval = run.stats_interval.max(Duration::from_secs(3600));
        let summary = fuzz(&run, stop, &mut |_| {})?;
        let found = &summary.new_signatures;
        rows.push(BenchRow {
            id,
            corpus: summary.final_stats.corpus,
            execs: summary.final_stats.execs,
            cover: summary.final_stats.cover,
            time1: found.first().map(|f| f.found_at),
            time2: found.get(1).map(|f| f.found_at),
        });
    }
    Ok(BenchReport { rows })
}

/// Removes a previous benchmark run directory, refusing anything that does
/// not look like one.
fn remove_run_dir(dir: &Path) -> Result<()> {
    if !dir.exists() {
        return Ok(());
    }
    let expected = ["corpus", "crashers", "suppressions", "quarantine"];
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if !expected.iter().any(|n| name == *n) {
            return Err(Error::Config(format!(
                "refusing to clear {}: unexpected entry {:?}",
                dir.display(),
                name
            )));
        }
    }
    fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// One recorded crasher as read back from a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrasherInfo {
    pub hash: String,
    pub kind: String,
    pub signature: String,
    pub message: String,
    pub quoted: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirReport {
    pub corpus: usize,
    pub crashers: Vec<CrasherInfo>,
    /// `(signature, normalized message)` pairs.
    pub suppressions: Vec<(String, String)>,
    /// Files in `crashers/`, all three kinds counted.
    pub crasher_files: usize,
}

/// Summarizes an existing run directory without modifying it.
pub fn report_dir(dir: &Path) -> Result<DirReport> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("{} is not a run directory", dir.display())));
    }
    let sub = |name: &str| dir.join(name);
    let files = |name: &str| -> Result<Vec<(String, PathBuf)>> {
        let path = sub(name);
        if path.is_dir() {
            sorted_files(&path)
        } else {
            Ok(Vec::new())
        }
    };
    let read = |path: &Path| fs::read_to_string(path).map_err(|e| Error::io(path, e));

    let crasher_files = files("crashers")?;
    let mut crashers = Vec::new();
    for (name, path) in &crasher_files {
        if name.contains('.') {
            continue;
        }
        let output = read(&path.with_extension("output")).unwrap_or_default();
        let field = |key: &str| {
            output
                .lines()
                .find_map(|l| l.strip_prefix(key))
                .unwrap_or("")
                .to_owned()
        };
        crashers.push(CrasherInfo {
            hash: name.clone(),
            kind: field("kind: "),
            signature: field("signature: "),
            message: field("message: "),
            quoted: read(&path.with_extension("quoted"))
                .unwrap_or_default()
                .trim_end()
                .to_owned(),
        });
    }
    let mut suppressions = Vec::new();
    for (name, path) in files("suppressions")? {
        suppressions.push((name, read(&path)?.trim_end().to_owned()));
    }
    Ok(DirReport {
        corpus: files("corpus")?.len(),
        crashers,
        suppressions,
        crasher_files: crasher_files.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::encode;

    fn spec(name: &str) -> TargetSpec {
        target(name).unwrap()
    }

    const TIMEOUT: Duration = Duration::from_secs(10);

    #[test]
    fn witnesses_crash_with_expected_kind() {
        for name in ["drm", "smallbank", "marbles", "foodtrace"] {
            let spec = spec(name);
            let result = execute_one(spec.witness.as_ref().unwrap(), &spec, TIMEOUT);
            let crash = result.crash.expect(name);
            assert!(result.verdict.is_none());
            let bug = &spec.expected_bugs[0];
            assert_eq!(crash.kind, bug.kind, "{name}");
            assert!(
                crash.message.contains(bug.message_contains),
                "{name}: {}",
                crash.message
            );
        }
    }

    #[test]
    fn foodtrace_message_names_function() {
        let spec = spec("foodtrace");
        let crash = execute_one(spec.witness.as_ref().unwrap(), &spec, TIMEOUT)
            .crash
            .unwrap();
        assert_eq!(
            crash.message,
            "addIngInfo Failed: group ingredient: field IngID differs"
        );
    }

    #[test]
    fn seeds_are_clean() {
        for name in crate::targets::TARGET_NAMES {
            let spec = spec(name);
            for case in &spec.seeds {
                let input = case.encode(&spec.groups).unwrap();
                let result = execute_one(&input, &spec, TIMEOUT);
                assert_eq!(
                    result.verdict,
                    Some(HarnessVerdict::Clean),
                    "{name} {}",
                    case.label
                );
                assert!(result.run_coverage.cover_count() > 0);
            }
        }
    }

    #[test]
    fn example01_transfer_is_clean() {
        let spec = spec("example01");
        let result = execute_one(&encode(0, &["10"]), &spec, TIMEOUT);
        assert_eq!(result.verdict, Some(HarnessVerdict::Clean));
        assert!(result.crash.is_none());
    }

    #[test]
    fn rejected_input_is_clean() {
        let spec = spec("drm");
        let result = execute_one(&[], &spec, TIMEOUT);
        assert_eq!(result.verdict, Some(HarnessVerdict::Clean));
    }

    #[test]
    fn replay_exposes_ledger_state() {
        let spec = spec("smallbank");
        let (result, ledger) = replay(spec.witness.as_ref().unwrap(), &spec, TIMEOUT);
        assert_eq!(result.crash.unwrap().kind, CrashKind::Abort);
        assert_eq!(ledger.state()["carol"], b"-2147483648");
    }

    #[test]
    fn expired_deadline_is_a_timeout_without_coverage() {
        let spec = spec("example01");
        let result = execute_one(&encode(0, &["10"]), &spec, Duration::from_nanos(1));
        let crash = result.crash.unwrap();
        assert_eq!(crash.kind, CrashKind::Timeout);
        assert_eq!(result.run_coverage.cover_count(), 0);
    }

    #[test]
    fn stats_line_format() {
        let snap = StatsSnapshot {
            elapsed: Duration::from_millis(3_400),
            corpus: 12,
            execs: 9_000,
            execs_per_sec: 2_647.06,
            cover: 40,
            crashers: 1,
        };
        assert_eq!(
            snap.to_string(),
            "3s: corpus: 12, execs: 9000 (2647/sec), cover: 40, crashers: 1"
        );
    }

    #[test]
    fn duration_format() {
        assert_eq!(format_duration(Duration::from_millis(1_250)), "1.2s");
        assert_eq!(format_duration(Duration::from_secs(66)), "1m6s");
        assert_eq!(format_duration(Duration::from_secs(3_725)), "1h2m5s");
    }

    #[test]
    fn config_validation() {
        let mut config = FuzzerConfig::new("drm", "/nonexistent");
        assert!(config.validate().is_ok());
        config.workers = 0;
        assert!(config.validate().is_err());
        config.workers = 1;
        config.budget_time = Some(Duration::ZERO);
        assert!(config.validate().is_err());
    }
}
