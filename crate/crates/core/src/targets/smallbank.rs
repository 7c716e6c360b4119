//! Savings-bank accounts with 32-bit signed balances. `deposit` adds with
//! wrapping arithmetic; the post-write sanity assertion aborts the contract
//! when two non-negative operands produce a smaller balance.

use super::{literals, parse_decimal, text, ExpectedBug, TargetSpec};
use crate::contract::{route, Contract, ContractResponse, Handler, StubHandle};
use crate::corpus::CrashKind;
use crate::harness::{encode, TestGroup, UnitCase};

pub struct Smallbank;

fn parse_i32(param: &[u8]) -> Option<i32> {
    parse_decimal(param).and_then(|v| i32::try_from(v).ok())
}

fn read_balance(stub: &mut StubHandle<'_>, id: &str) -> Option<i32> {
    stub.get_state(id).and_then(|v| parse_i32(&v))
}

fn create_account(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let [id, balance] = params else {
        return ContractResponse::error("incorrect number of arguments, expecting 2");
    };
    let Some(id) = text(id) else {
        stub.cover(0x3001);
        return ContractResponse::error("account id must be a printable string");
    };
    let Some(balance) = parse_i32(balance) else {
        stub.cover(0x3002);
        return ContractResponse::error("initial balance must be a 32-bit integer");
    };
    if balance < 0 {
        stub.cover(0x3003);
        return ContractResponse::error("initial balance must be non-negative");
    }
    if stub.get_state(id).is_some() {
        stub.cover(0x3004);
        return ContractResponse::error("account already exists");
    }
    stub.put_state(id, balance.to_string().as_bytes());
    ContractResponse::ok(Vec::new())
}

fn deposit(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let [id, amount] = params else {
        return ContractResponse::error("incorrect number of arguments, expecting 2");
    };
    let Some(id) = text(id) else {
        stub.cover(0x3011);
        return ContractResponse::error("account id must be a printable string");
    };
    let Some(amount) = parse_i32(amount) else {
        stub.cover(0x3012);
        return ContractResponse::error("deposit amount must be a 32-bit integer");
    };
    if amount < 0 {
        stub.cover(0x3013);
        return ContractResponse::error("deposit amount must be non-negative");
    }
    let Some(old) = read_balance(stub, id) else {
        stub.cover(0x3014);
        return ContractResponse::error("account not found");
    };
    let new = old.wrapping_add(amount);
    stub.put_state(id, new.to_string().as_bytes());
    assert!(
        !(amount > 0 && old >= 0) || new >= old,
        "overflow: balance {old} + deposit {amount} = {new}"
    );
    stub.cover(0x3015);
    ContractResponse::ok(Vec::new())
}

fn get_balance(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let Some(id) = params.first().and_then(|p| text(p)) else {
        return ContractResponse::error("incorrect arguments, expecting account id");
    };
    match stub.get_state(id) {
        Some(v) => ContractResponse::ok(v),
        None => ContractResponse::error("account not found"),
    }
}

impl Contract for Smallbank {
    fn name(&self) -> &str {
        "smallbank"
    }

    /// Arguments are `(account, balance)` pairs.
    fn init(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        if !args.len().is_multiple_of(2) {
            return ContractResponse::error("expecting (account, balance) pairs");
        }
        for pair in args.chunks(2) {
            let (Some(id), Some(balance)) = (text(&pair[0]), parse_i32(&pair[1])) else {
                return ContractResponse::error("invalid account fixture");
            };
            stub.put_state(id, balance.to_string().as_bytes());
        }
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        const TABLE: &[(&str, Handler)] = &[
            ("createAccount", create_account),
            ("deposit", deposit),
            ("getBalance", get_balance),
        ];
        route(stub, args, TABLE)
    }

    fn literals(&self) -> Vec<Vec<u8>> {
        literals(&["createAccount", "deposit", "getBalance", "alice", "carol"])
    }
}

fn compare_account(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    match (parse_i32(&published[1]), parse_i32(payload)) {
        (Some(a), Some(b)) if a == b => Ok(()),
        _ => Err("field balance differs".into()),
    }
}

fn compare_deposit(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    match (parse_i32(&published[1]), parse_i32(payload)) {
        (Some(amount), Some(balance)) if balance >= amount => Ok(()),
        _ => Err("field balance below deposited amount".into()),
    }
}

pub fn target_smallbank() -> TargetSpec {
    TargetSpec {
        contract: Box::new(Smallbank),
        // carol's account is already at the i32 ceiling
        fixture: literals(&["alice", "100", "carol", "2147483647"]),
        groups: vec![
            TestGroup::new("account", "createAccount", "getBalance", 2, 0, compare_account),
            TestGroup::new("deposit", "deposit", "getBalance", 2, 0, compare_deposit),
        ],
        seeds: vec![
            UnitCase::new("S1", &["createAccount", "dave", "500"]),
            UnitCase::new("S2", &["deposit", "alice", "50"]),
            UnitCase::new("S3", &["deposit", "carol", "0"]),
        ],
        expected_bugs: vec![ExpectedBug {
            kind: CrashKind::Abort,
            message_contains: "overflow",
        }],
        witness: Some(encode(1, &["carol", "1"])),
    }
}
