//! Input framing, grouped publish/query checks and seed generation.
//!
//! A raw fuzz input is framed as
//!
//! ```text
//! [group index: u8] ([param length: u16 BE] [param bytes])*
//! ```
//!
//! Decoding is total: the group index is taken modulo the number of groups,
//! missing parameters decode as empty strings, a parameter whose declared
//! length runs past the end takes whatever bytes remain, and anything after
//! the group's arity is ignored. Only the empty input is rejected.

use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;

use crate::contract::{Contract, ContractResponse};
use crate::coverage::CoverageMap;
use crate::error::{Error, Result};
use crate::ledger::{CallEnv, MockLedger};

/// Compares the parameters a publish call accepted with the payload its
/// query returned. `Err` carries a description of the mismatching field.
pub type CompareFn = fn(published: &[Vec<u8>], payload: &[u8]) -> std::result::Result<(), String>;

/// A publish function paired with the query that reads its record back.
#[derive(Debug, Clone)]
pub struct TestGroup {
    pub name: String,
    pub publish_fn: String,
    pub query_fn: String,
    pub arity: usize,
    pub key_index: usize,
    pub compare: CompareFn,
}

impl TestGroup {
    pub fn new(
        name: &str,
        publish_fn: &str,
        query_fn: &str,
        arity: usize,
        key_index: usize,
        compare: CompareFn,
    ) -> Self {
        assert!(arity >= 1, "group {name}: arity must be at least 1");
        assert!(key_index < arity, "group {name}: key index out of range");
        Self {
            name: name.to_owned(),
            publish_fn: publish_fn.to_owned(),
            query_fn: query_fn.to_owned(),
            arity,
            key_index,
            compare,
        }
    }

    fn mismatch(&self, detail: &str) -> String {
        format!("{} Failed: group {}: {detail}", self.publish_fn, self.name)
    }
}

/// 0 = a logic vulnerability may exist, 1 = clean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarnessVerdict {
    Suspect = 0,
    Clean = 1,
}

impl HarnessVerdict {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Reject,
    Call { group: usize, params: Vec<Vec<u8>> },
}

pub fn decode(raw: &[u8], groups: &[TestGroup]) -> Decoded {
    let Some((&selector, mut rest)) = raw.split_first() else {
        return Decoded::Reject;
    };
    if groups.is_empty() {
        return Decoded::Reject;
    }
    let group = selector as usize % groups.len();
    let arity = groups[group].arity;
    let mut params = Vec::with_capacity(arity);
    while params.len() < arity && !rest.is_empty() {
        let declared = match rest {
            [hi, lo, tail @ ..] => {
                rest = tail;
                u16::from_be_bytes([*hi, *lo]) as usize
            }
            _ => {
                rest = &[];
                0
            }
        };
        let take = declared.min(rest.len());
        params.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    params.resize(arity, Vec::new());
    Decoded::Call { group, params }
}

/// Frames a call to group `group`. Parameters longer than 65535 bytes are
/// truncated.
pub fn encode<P: AsRef<[u8]>>(group: u8, params: &[P]) -> Vec<u8> {
    let mut out = vec![group];
    for param in params {
        let param = param.as_ref();
        let param = &param[..param.len().min(u16::MAX as usize)];
        out.extend_from_slice(&(param.len() as u16).to_be_bytes());
        out.extend_from_slice(param);
    }
    out
}

/// Deterministic transaction ids: `tx1`, `tx2`, ...
#[derive(Debug, Default, Clone)]
pub struct UuidSource {
    next: u64,
}

impl UuidSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&mut self) -> String {
        self.next += 1;
        format!("tx{}", self.next)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRun {
    pub verdict: HarnessVerdict,
    /// Failure message for a suspect verdict, naming the group and field.
    pub mismatch: Option<String>,
}

impl GroupRun {
    fn clean() -> Self {
        Self {
            verdict: HarnessVerdict::Clean,
            mismatch: None,
        }
    }

    fn suspect(message: String) -> Self {
        Self {
            verdict: HarnessVerdict::Suspect,
            mismatch: Some(message),
        }
    }
}

/// Publishes `params`, queries the record back by its key and compares.
///
/// A rejected publish is clean. Contract aborts propagate as unwinds.
pub fn run_group(
    ledger: &mut MockLedger,
    contract: &dyn Contract,
    group: &TestGroup,
    params: &[Vec<u8>],
    uuids: &mut UuidSource,
    coverage: &mut CoverageMap,
    deadline: Option<Instant>,
) -> GroupRun {
    let mut publish_args = Vec::with_capacity(params.len() + 1);
    publish_args.push(group.publish_fn.as_bytes().to_vec());
    publish_args.extend_from_slice(params);
    let published = invoke(ledger, contract, &publish_args, uuids, coverage, deadline);
    if !published.is_ok() {
        return GroupRun::clean();
    }

    let key = params.get(group.key_index).cloned().unwrap_or_default();
    let query_args = vec![group.query_fn.as_bytes().to_vec(), key];
    let queried = invoke(ledger, contract, &query_args, uuids, coverage, deadline);
    if !queried.is_ok() {
        return GroupRun::suspect(
            group.mismatch(&format!("query {} failed: {}", group.query_fn, queried.message)),
        );
    }
    match (group.compare)(params, &queried.payload) {
        Ok(()) => GroupRun::clean(),
        Err(detail) => GroupRun::suspect(group.mismatch(&detail)),
    }
}

fn invoke(
    ledger: &mut MockLedger,
    contract: &dyn Contract,
    args: &[Vec<u8>],
    uuids: &mut UuidSource,
    coverage: &mut CoverageMap,
    deadline: Option<Instant>,
) -> ContractResponse {
    ledger
        .mock_invoke_with(&uuids.next_id(), args, contract, CallEnv { coverage, deadline })
        .expect("harness transactions are serial with non-empty ids")
}

/// A unit-test call: function name followed by its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitCase {
    pub label: String,
    pub args: Vec<Vec<u8>>,
}

impl UnitCase {
    pub fn new<S: AsRef<[u8]>>(label: &str, args: &[S]) -> Self {
        Self {
            label: label.to_owned(),
            args: args.iter().map(|a| a.as_ref().to_vec()).collect(),
        }
    }

    /// Frames the case for the group whose publish function it calls.
    pub fn encode(&self, groups: &[TestGroup]) -> Result<Vec<u8>> {
        let (function, params) = self
            .args
            .split_first()
            .ok_or_else(|| Error::Config(format!("unit case {}: empty call", self.label)))?;
        let index = groups
            .iter()
            .position(|g| g.publish_fn.as_bytes() == function.as_slice())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unit case {}: no group publishes {:?}",
                    self.label,
                    String::from_utf8_lossy(function)
                ))
            })?;
        let group = &groups[index];
        if params.len() != group.arity {
            return Err(Error::Config(format!(
                "unit case {}: {} params for {} (arity {})",
                self.label,
                params.len(),
                group.publish_fn,
                group.arity
            )));
        }
        let index = u8::try_from(index).map_err(|_| Error::Config("too many groups".into()))?;
        Ok(encode(index, params))
    }
}

const WORDS: &[&str] = &[
    "MiGao",
    "NuoMi",
    "Shanxi",
    "Shaanxi",
    "transport",
    "alice",
    "bob",
    "blue",
    "red",
    "owner",
    "Beijing",
    "rice",
    "flour",
    "sugar",
    "label",
];

fn random_param<R: Rng + ?Sized>(rng: &mut R) -> Vec<u8> {
    match rng.gen_range(0..4) {
        0 => {
            let letter = char::from(b'a' + rng.gen_range(0..26));
            format!("{letter}{}", rng.gen_range(1..1000u32)).into_bytes()
        }
        1 => rng.gen_range(0..100_000u32).to_string().into_bytes(),
        2 => WORDS[rng.gen_range(0..WORDS.len())].as_bytes().to_vec(),
        _ => format!(
            "20{:02}-{:02}-{:02}",
            rng.gen_range(10..30),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28)
        )
        .into_bytes(),
    }
}

/// Initial corpus: every unit case framed for its group, then `n_random`
/// frames with typed random parameters (ids, numbers, words, dates).
/// Duplicates are dropped, first occurrence wins.
pub fn gen_seed_corpus<R: Rng + ?Sized>(
    groups: &[TestGroup],
    unit_cases: &[UnitCase],
    rng: &mut R,
    n_random: usize,
) -> Result<Vec<Vec<u8>>> {
    if groups.is_empty() {
        return Err(Error::Config("target has no test groups".into()));
    }
    let mut seeds = Vec::with_capacity(unit_cases.len() + n_random);
    for case in unit_cases {
        seeds.push(case.encode(groups)?);
    }
    for _ in 0..n_random {
        let index = rng.gen_range(0..groups.len());
        let params: Vec<Vec<u8>> = (0..groups[index].arity).map(|_| random_param(rng)).collect();
        seeds.push(encode(index as u8, &params));
    }
    let mut seen = HashSet::new();
    seeds.retain(|s| seen.insert(s.clone()));
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn always_ok(_: &[Vec<u8>], _: &[u8]) -> std::result::Result<(), String> {
        Ok(())
    }

    fn groups(n: usize) -> Vec<TestGroup> {
        (0..n)
            .map(|i| {
                TestGroup::new(
                    &format!("g{i}"),
                    &format!("add{i}"),
                    &format!("get{i}"),
                    3,
                    0,
                    always_ok,
                )
            })
            .collect()
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(decode(&[], &groups(3)), Decoded::Reject);
    }

    #[test]
    fn well_formed_frame() {
        let frame = encode(0, &["001", "M1", "NuoMi"]);
        assert_eq!(
            decode(&frame, &groups(3)),
            Decoded::Call {
                group: 0,
                params: vec![b"001".to_vec(), b"M1".to_vec(), b"NuoMi".to_vec()]
            }
        );
    }

    #[test]
    fn group_selector_modulo() {
        match decode(&[0x07], &groups(3)) {
            Decoded::Call { group, params } => {
                assert_eq!(group, 1);
                assert_eq!(params, vec![Vec::<u8>::new(); 3]);
            }
            Decoded::Reject => panic!("rejected"),
        }
    }

    #[test]
    fn truncated_and_trailing_bytes() {
        // declared length 10 but only 2 bytes follow
        let raw = [0, 0, 10, b'a', b'b'];
        assert_eq!(
            decode(&raw, &groups(1)),
            Decoded::Call {
                group: 0,
                params: vec![b"ab".to_vec(), vec![], vec![]]
            }
        );
        // lone length byte
        let raw = [0, 0, 1, b'a', 7];
        assert_eq!(
            decode(&raw, &groups(1)),
            Decoded::Call {
                group: 0,
                params: vec![b"a".to_vec(), vec![], vec![]]
            }
        );
        let mut raw = encode(0, &["a", "b", "c"]);
        raw.extend_from_slice(b"trailing");
        assert_eq!(
            decode(&raw, &groups(1)),
            Decoded::Call {
                group: 0,
                params: vec![b"a".to_vec(), b"b".to_vec(), b"c".to_vec()]
            }
        );
    }

    #[test]
    fn unit_case_arity_checked() {
        let gs = groups(2);
        assert!(UnitCase::new("ok", &["add1", "a", "b", "c"]).encode(&gs).is_ok());
        assert!(UnitCase::new("short", &["add1", "a"]).encode(&gs).is_err());
        assert!(UnitCase::new("unknown", &["nope", "a", "b", "c"])
            .encode(&gs)
            .is_err());
    }

    #[test]
    fn random_seeds_are_deterministic_and_decodable() {
        let gs = groups(3);
        let a = gen_seed_corpus(&gs, &[], &mut ChaCha8Rng::seed_from_u64(4), 100).unwrap();
        let b = gen_seed_corpus(&gs, &[], &mut ChaCha8Rng::seed_from_u64(4), 100).unwrap();
        assert_eq!(a, b);
        assert!(a.len() > 90);
        for seed in &a {
            assert_ne!(decode(seed, &gs), Decoded::Reject);
        }
    }

    proptest::proptest! {
        #[test]
        fn decode_encode_identity(
            group in 0u8..=255,
            n_groups in 1usize..5,
            params in proptest::collection::vec(
                proptest::collection::vec(proptest::num::u8::ANY, 0..40), 0..5),
        ) {
            let gs = groups(n_groups);
            let index = group as usize % n_groups;
            let mut expected = params.clone();
            expected.resize(gs[index].arity.max(expected.len()), Vec::new());
            expected.truncate(gs[index].arity);
            proptest::prop_assert_eq!(
                decode(&encode(group, &params), &gs),
                Decoded::Call { group: index, params: expected }
            );
        }

        #[test]
        fn decode_is_total(raw in proptest::collection::vec(proptest::num::u8::ANY, 0..64)) {
            match decode(&raw, &groups(3)) {
                Decoded::Reject => proptest::prop_assert!(raw.is_empty()),
                Decoded::Call { params, .. } => proptest::prop_assert_eq!(params.len(), 3),
            }
        }
    }
}
