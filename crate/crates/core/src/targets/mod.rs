//! Built-in fuzz targets.
//!
//! Four of them carry one planted defect each (empty-key logic hole,
//! wrapping integer overflow, number-string normalization, HTML-escaping
//! type conversion); `example01` is the clean control.

mod drm;
mod example01;
mod foodtrace;
mod marbles;
mod smallbank;

use crate::contract::Contract;
use crate::corpus::CrashKind;
use crate::error::{Error, Result};
use crate::harness::{TestGroup, UnitCase};

pub use drm::target_drm;
pub use example01::target_example01;
pub use foodtrace::target_foodtrace;
pub use marbles::target_marbles;
pub use smallbank::target_smallbank;

/// A crash class a target is known to contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedBug {
    pub kind: CrashKind,
    /// Substring every failure message of this class contains.
    pub message_contains: &'static str,
}

/// A contract together with everything needed to fuzz it.
pub struct TargetSpec {
    pub contract: Box<dyn Contract>,
    /// Arguments passed to `Init` before every execution.
    pub fixture: Vec<Vec<u8>>,
    pub groups: Vec<TestGroup>,
    pub seeds: Vec<UnitCase>,
    pub expected_bugs: Vec<ExpectedBug>,
    /// A minimal input triggering the planted bug, if there is one.
    pub witness: Option<Vec<u8>>,
}

impl TargetSpec {
    pub fn name(&self) -> &str {
        self.contract.name()
    }
}

impl std::fmt::Debug for TargetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetSpec")
            .field("name", &self.name())
            .field("groups", &self.groups.len())
            .field("seeds", &self.seeds.len())
            .finish()
    }
}

pub const TARGET_NAMES: &[&str] = &["example01", "drm", "smallbank", "marbles", "foodtrace"];

pub fn target(name: &str) -> Result<TargetSpec> {
    match name {
        "example01" => Ok(target_example01()),
        "drm" => Ok(target_drm()),
        "smallbank" => Ok(target_smallbank()),
        "marbles" => Ok(target_marbles()),
        "foodtrace" => Ok(target_foodtrace()),
        _ => Err(Error::UnknownTarget {
            name: name.to_owned(),
            valid: TARGET_NAMES.join(", "),
        }),
    }
}

/// Parameter as text: valid UTF-8 without control characters.
fn text(param: &[u8]) -> Option<&str> {
    let s = std::str::from_utf8(param).ok()?;
    (!s.chars().any(char::is_control)).then_some(s)
}

/// Decimal ASCII integer with optional `+`/`-` sign.
fn parse_decimal(param: &[u8]) -> Option<i64> {
    std::str::from_utf8(param).ok()?.parse().ok()
}

fn literals(items: &[&str]) -> Vec<Vec<u8>> {
    items.iter().map(|s| s.as_bytes().to_vec()).collect()
}
