//! Reference-map oracle for the mock ledger: random put/get/del scripts are
//! run through a contract and replayed against a `BTreeMap`.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ledgerfuzz::contract::{Contract, ContractResponse, StubHandle};
use ledgerfuzz::ledger::MockLedger;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Executes a script of `op key [value]` triples inside one transaction and
/// returns every read as `1<value>` (present) or `0` (absent), length-framed.
pub struct Script;

impl Contract for Script {
    fn name(&self) -> &str {
        "script"
    }

    fn init(&self, _stub: &mut StubHandle<'_>, _args: &[Vec<u8>]) -> ContractResponse {
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        let mut reads = Vec::new();
        for step in args.chunks(3) {
            let key = String::from_utf8(step[1].clone()).unwrap();
            match step[0].as_slice() {
                b"put" => stub.put_state(&key, &step[2]),
                b"del" => stub.del_state(&key),
                b"get" => match stub.get_state(&key) {
                    Some(v) => {
                        reads.push(1);
                        reads.extend_from_slice(&(v.len() as u32).to_be_bytes());
                        reads.extend_from_slice(&v);
                    }
                    None => reads.push(0),
                },
                other => panic!("bad op {other:?}"),
            }
        }
        ContractResponse::ok(reads)
    }
}

#[derive(Debug, Clone)]
pub enum Op {
    Put(String, Vec<u8>),
    Get(String),
    Del(String),
}

fn random_key(rng: &mut ChaCha8Rng) -> String {
    const KEYS: &[&str] = &[
        "",
        "a",
        "b",
        "ab",
        "A",
        "key",
        "é",
        "k\u{0}",
        " ",
        "long-key-name",
    ];
    if rng.gen_bool(0.8) {
        KEYS[rng.gen_range(0..KEYS.len())].to_owned()
    } else {
        (0..rng.gen_range(0..6))
            .map(|_| rng.gen_range('a'..='e'))
            .collect()
    }
}

fn random_op(rng: &mut ChaCha8Rng) -> Op {
    let key = random_key(rng);
    match rng.gen_range(0..10) {
        0..=3 => {
            let len = if rng.gen_bool(0.25) {
                0
            } else {
                rng.gen_range(1..10)
            };
            Op::Put(key, (0..len).map(|_| rng.gen()).collect())
        }
        4..=7 => Op::Get(key),
        _ => Op::Del(key),
    }
}

pub fn script_args(ops: &[Op]) -> Vec<Vec<u8>> {
    let mut args = Vec::new();
    for op in ops {
        let (name, key, value) = match op {
            Op::Put(k, v) => ("put", k, v.clone()),
            Op::Get(k) => ("get", k, Vec::new()),
            Op::Del(k) => ("del", k, Vec::new()),
        };
        args.extend([name.as_bytes().to_vec(), key.as_bytes().to_vec(), value]);
    }
    args
}

fn expected_reads(reference: &mut BTreeMap<String, Vec<u8>>, ops: &[Op]) -> Vec<u8> {
    let mut reads = Vec::new();
    for op in ops {
        match op {
            Op::Put(k, v) => {
                reference.insert(k.clone(), v.clone());
            }
            Op::Del(k) => {
                reference.remove(k);
            }
            Op::Get(k) => match reference.get(k) {
                Some(v) => {
                    reads.push(1);
                    reads.extend_from_slice(&(v.len() as u32).to_be_bytes());
                    reads.extend_from_slice(v);
                }
                None => reads.push(0),
            },
        }
    }
    reads
}

/// Runs one random sequence split into transactions; returns a mismatch
/// description, if any.
pub fn run_sequence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ledger = MockLedger::new();
    let mut reference = BTreeMap::new();
    let ops: Vec<Op> = (0..rng.gen_range(1..80)).map(|_| random_op(&mut rng)).collect();
    let mut rest = ops.as_slice();
    let mut tx = 0;
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len().min(8));
        let (batch, tail) = rest.split_at(take);
        rest = tail;
        tx += 1;
        let resp = ledger
            .mock_invoke(&format!("tx{tx}"), &script_args(batch), &Script)
            .map_err(|e| e.to_string())?;
        let expected = expected_reads(&mut reference, batch);
        if resp.payload != expected {
            return Err(format!("seed {seed}: reads differ in tx{tx} for {batch:?}"));
        }
        if ledger.state() != &reference {
            return Err(format!("seed {seed}: state differs after tx{tx}"));
        }
    }
    if ledger.invocation_count() != tx {
        return Err(format!(
            "seed {seed}: invocation count {} != {tx}",
            ledger.invocation_count()
        ));
    }
    Ok(())
}
