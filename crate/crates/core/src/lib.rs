//! Coverage-guided fuzzing of key-value-ledger smart contracts.
//!
//! Contracts run against an in-memory [`MockLedger`]. Each fuzz input is
//! decoded into a publish/query pair, and the read-back record is compared with
//! what was written. Aborts, timeouts and read-back mismatches are recorded
//! as crashes and deduplicated by signature.

pub mod contract;
pub mod corpus;
pub mod coverage;
mod error;
pub mod fuzzer;
pub mod harness;
pub mod ledger;
pub mod mutation;
pub mod targets;

pub use contract::{Contract, ContractResponse, StubHandle};
pub use corpus::{CorpusStore, CrashKind, CrashReport};
pub use coverage::CoverageMap;
pub use error::{Error, Result};
pub use fuzzer::{
    bench_mutators, execute_one, fuzz, BenchBudget, BenchReport, ExecResult, FuzzerConfig, RunSummary,
};
pub use harness::{HarnessVerdict, TestGroup};
pub use ledger::MockLedger;
pub use mutation::{MutatorConfig, MutatorId, MutatorSet};
pub use targets::{target, TargetSpec, TARGET_NAMES};
