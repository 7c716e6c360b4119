//! On-disk corpus, priority scheduling and crash bookkeeping.
//!
//! Layout under the run directory:
//!
//! ```text
//! corpus/<sha256hex>             input bytes
//! crashers/<sha256hex>           crashing input bytes
//! crashers/<sha256hex>.quoted    printable escaped rendering
//! crashers/<sha256hex>.output    kind, signature and failure message
//! suppressions/<signature>       normalized failure message
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;

use rand::Rng;
use regex::Regex;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mutation::MutatorId;

pub const MIN_PRIORITY: f64 = 0.0625;
pub const MAX_PRIORITY: f64 = 16.0;

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddCause {
    Seed,
    NewCoverage,
    OracleSuspect,
}

impl AddCause {
    fn initial_priority(self) -> f64 {
        match self {
            AddCause::Seed => 1.0,
            AddCause::NewCoverage => 2.0,
            AddCause::OracleSuspect => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    NewCoverage,
    Suspect,
    Nothing,
}

/// Index of an entry in a [`CorpusStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub data: Vec<u8>,
    pub hash: String,
    pub priority: f64,
    pub depth: u32,
    pub source_op: Option<MutatorId>,
    pub exec_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrashKind {
    Abort,
    OracleMismatch,
    Timeout,
}

impl fmt::Display for CrashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrashKind::Abort => "Abort",
            CrashKind::OracleMismatch => "OracleMismatch",
            CrashKind::Timeout => "Timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrashReport {
    pub data: Vec<u8>,
    pub rendered: String,
    pub message: String,
    pub kind: CrashKind,
    pub signature: String,
    pub found_at: Duration,
}

impl CrashReport {
    pub fn new(data: Vec<u8>, kind: CrashKind, message: impl Into<String>, found_at: Duration) -> Self {
        let message = message.into();
        Self {
            rendered: quote(&data),
            signature: crash_signature(kind, &message),
            data,
            message,
            kind,
            found_at,
        }
    }
}

/// Printable, escaped, double-quoted rendering of raw bytes.
pub fn quote(data: &[u8]) -> String {
    format!("\"{}\"", data.escape_ascii())
}

static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"0[xX][0-9a-fA-F]+|[0-9]+").unwrap());

/// Failure message with hex and decimal numbers replaced by placeholders.
pub fn normalize_message(message: &str) -> String {
    NUMBER
        .replace_all(message.trim(), |caps: &regex::Captures<'_>| {
            if caps[0].len() > 2 && caps[0][1..2].eq_ignore_ascii_case("x") {
                "0xN"
            } else {
                "N"
            }
        })
        .into_owned()
}

/// Dedup key for a crash: depends only on the kind and the normalized
/// message, never on the input bytes.
pub fn crash_signature(kind: CrashKind, message: &str) -> String {
    sha256_hex(format!("{kind}\n{}", normalize_message(message)).as_bytes())
}

#[derive(Debug, Clone)]
pub struct StoreDirs {
    pub root: PathBuf,
    pub corpus: PathBuf,
    pub crashers: PathBuf,
    pub suppressions: PathBuf,
    pub quarantine: PathBuf,
}

impl StoreDirs {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        let root = root.into();
        Self {
            corpus: root.join("corpus"),
            crashers: root.join("crashers"),
            suppressions: root.join("suppressions"),
            quarantine: root.join("quarantine"),
            root,
        }
    }
}

#[derive(Debug)]
pub struct CorpusStore {
    dirs: StoreDirs,
    max_input_len: usize,
    entries: Vec<CorpusEntry>,
    by_hash: HashMap<String, EntryId>,
    suppressions: BTreeMap<String, String>,
}

impl CorpusStore {
    /// Opens (creating if needed) the store under `root`, reloading any
    /// existing corpus files and suppressions. Reloaded entries are treated
    /// as seeds with priority 1.0; files whose name does not match the
    /// SHA-256 of their content are moved to `quarantine/`.
    pub fn open(root: impl Into<PathBuf>, max_input_len: usize) -> Result<Self> {
        let dirs = StoreDirs::new(root);
        for dir in [&dirs.root, &dirs.corpus, &dirs.crashers, &dirs.suppressions] {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut store = Self {
            dirs,
            max_input_len,
            entries: Vec::new(),
            by_hash: HashMap::new(),
            suppressions: BTreeMap::new(),
        };
        store.reload_corpus()?;
        store.reload_suppressions()?;
        Ok(store)
    }

    fn reload_corpus(&mut self) -> Result<()> {
        for (name, path) in sorted_files(&self.dirs.corpus)? {
            let data = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&data) != name || data.len() > self.max_input_len {
                fs::create_dir_all(&self.dirs.quarantine).map_err(|e| Error::io(&self.dirs.quarantine, e))?;
                let dest = self.dirs.quarantine.join(&name);
                fs::rename(&path, &dest).map_err(|e| Error::io(&path, e))?;
                continue;
            }
            self.insert(data, name, AddCause::Seed, 0, None);
        }
        Ok(())
    }

    fn reload_suppressions(&mut self) -> Result<()> {
        for (name, path) in sorted_files(&self.dirs.suppressions)? {
            let message = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            self.suppressions.insert(name, message.trim_end().to_owned());
        }
        Ok(())
    }

    pub fn dirs(&self) -> &StoreDirs {
        &self.dirs
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn entry(&self, id: EntryId) -> &CorpusEntry {
        &self.entries[id.0]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, data: &[u8]) -> bool {
        self.by_hash.contains_key(&sha256_hex(data))
    }

    /// Adds and persists a new entry. Returns `None` if identical content is
    /// already present.
    pub fn add_entry(
        &mut self,
        data: Vec<u8>,
        cause: AddCause,
        parent: Option<EntryId>,
        source_op: Option<MutatorId>,
    ) -> Result<Option<EntryId>> {
        if data.len() > self.max_input_len {
            return Err(Error::Config(format!(
                "corpus entry of {} bytes exceeds max input length {}",
                data.len(),
                self.max_input_len
            )));
        }
        let hash = sha256_hex(&data);
        if self.by_hash.contains_key(&hash) {
            return Ok(None);
        }
        let path = self.dirs.corpus.join(&hash);
        fs::write(&path, &data).map_err(|e| Error::io(&path, e))?;
        let depth = parent.map_or(0, |p| self.entries[p.0].depth + 1);
        Ok(Some(self.insert(data, hash, cause, depth, source_op)))
    }

    fn insert(
        &mut self,
        data: Vec<u8>,
        hash: String,
        cause: AddCause,
        depth: u32,
        source_op: Option<MutatorId>,
    ) -> EntryId {
        let id = EntryId(self.entries.len());
        self.by_hash.insert(hash.clone(), id);
        self.entries.push(CorpusEntry {
            data,
            hash,
            priority: cause.initial_priority(),
            depth,
            source_op,
            exec_count: 0,
        });
        id
    }

    /// Picks an entry with probability proportional to its priority and bumps
    /// its exec count.
    ///
    /// # Panics
    /// If the corpus is empty.
    pub fn pick<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EntryId {
        assert!(!self.entries.is_empty(), "pick from empty corpus");
        let total: f64 = self.entries.iter().map(|e| e.priority).sum();
        let mut target = rng.gen::<f64>() * total;
        let mut chosen = self.entries.len() - 1;
        for (i, entry) in self.entries.iter().enumerate() {
            if target < entry.priority {
                chosen = i;
                break;
            }
            target -= entry.priority;
        }
        self.entries[chosen].exec_count += 1;
        EntryId(chosen)
    }

    /// Uniformly random entry content, for splice donors. No bookkeeping.
    pub fn random_data<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&[u8]> {
        if self.entries.is_empty() {
            return None;
        }
        Some(&self.entries[rng.gen_range(0..self.entries.len())].data)
    }

    /// Doubles the priority on new coverage or a suspect verdict, decays it
    /// by 5% otherwise; always clamped to `[1/16, 16]`.
    pub fn reward(&mut self, id: EntryId, outcome: Outcome) {
        let entry = &mut self.entries[id.0];
        let factor = match outcome {
            Outcome::NewCoverage | Outcome::Suspect => 2.0,
            Outcome::Nothing => 0.95,
        };
        entry.priority = (entry.priority * factor).clamp(MIN_PRIORITY, MAX_PRIORITY);
    }

    /// Overrides an entry's priority, clamped like [`Self::reward`].
    pub fn set_priority(&mut self, id: EntryId, priority: f64) {
        self.entries[id.0].priority = priority.clamp(MIN_PRIORITY, MAX_PRIORITY);
    }

    pub fn is_suppressed(&self, signature: &str) -> bool {
        self.suppressions.contains_key(signature)
    }

    pub fn suppressions(&self) -> &BTreeMap<String, String> {
        &self.suppressions
    }

    pub fn suppression_count(&self) -> usize {
        self.suppressions.len()
    }

    /// Persists a crash unless its signature is already suppressed. Returns
    /// whether it was newly recorded.
    pub fn record_crash(&mut self, report: &CrashReport) -> Result<bool> {
        if self.is_suppressed(&report.signature) {
            return Ok(false);
        }
        let hash = sha256_hex(&report.data);
        let base = self.dirs.crashers.join(&hash);
        write_file(&base, &report.data)?;
        write_file(
            &base.with_extension("quoted"),
            format!("{}\n", report.rendered).as_bytes(),
        )?;
        write_file(&base.with_extension("output"), render_output(report).as_bytes())?;

        let normalized = normalize_message(&report.message);
        let sup = self.dirs.suppressions.join(&report.signature);
        write_file(&sup, format!("{normalized}\n").as_bytes())?;
        self.suppressions.insert(report.signature.clone(), normalized);
        Ok(true)
    }
}

fn render_output(report: &CrashReport) -> String {
    format!(
        "kind: {}\nsignature: {}\nmessage: {}\n",
        report.kind, report.signature, report.message
    )
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Regular files in `dir` as `(name, path)`, sorted by name.
pub fn sorted_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut files = Vec::new();
    let read = match fs::read_dir(dir) {
        Ok(read) => read,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(files),
        Err(e) => return Err(Error::io(dir, e)),
    };
    for entry in read {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            files.push((name.to_owned(), path.clone()));
        }
    }
    files.sort();
    Ok(files)
}
