//! Two-account transfer contract with full bounds checking. No planted bug.

use super::{literals, parse_decimal, TargetSpec};
use crate::contract::{route, Contract, ContractResponse, Handler, StubHandle};
use crate::harness::{TestGroup, UnitCase};

const FROM: &str = "A";
const TO: &str = "B";
const FROM_INITIAL: i64 = 100;
const TO_INITIAL: i64 = 200;

pub struct Example01;

fn balance(stub: &mut StubHandle<'_>, account: &str) -> Option<i64> {
    stub.get_state(account).and_then(|v| parse_decimal(&v))
}

fn transfer(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    if params.len() != 1 {
        stub.cover(0x1001);
        return ContractResponse::error("incorrect number of arguments, expecting 1");
    }
    let Some(amount) = parse_decimal(&params[0]) else {
        stub.cover(0x1002);
        return ContractResponse::error("invalid transaction amount, expecting an integer value");
    };
    if amount < 0 {
        stub.cover(0x1003);
        return ContractResponse::error("transaction amount must be non-negative");
    }
    let (Some(from), Some(to)) = (balance(stub, FROM), balance(stub, TO)) else {
        stub.cover(0x1004);
        return ContractResponse::error("failed to get account state");
    };
    if amount > from {
        stub.cover(0x1005);
        return ContractResponse::error("insufficient funds");
    }
    let Some(new_to) = to.checked_add(amount) else {
        stub.cover(0x1006);
        return ContractResponse::error("balance overflow");
    };
    stub.cover(0x1007);
    stub.put_state(FROM, (from - amount).to_string().as_bytes());
    stub.put_state(TO, new_to.to_string().as_bytes());
    ContractResponse::ok(Vec::new())
}

fn balances(stub: &mut StubHandle<'_>, _params: &[Vec<u8>]) -> ContractResponse {
    match (balance(stub, FROM), balance(stub, TO)) {
        (Some(a), Some(b)) => ContractResponse::ok(format!("{a},{b}")),
        _ => ContractResponse::error("failed to get account state"),
    }
}

fn query(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let Some(name) = params.first() else {
        return ContractResponse::error("incorrect number of arguments, expecting name");
    };
    match stub.get_state(&String::from_utf8_lossy(name)) {
        Some(v) => ContractResponse::ok(v),
        None => ContractResponse::error("nil amount"),
    }
}

impl Contract for Example01 {
    fn name(&self) -> &str {
        "example01"
    }

    fn init(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        if args.len() != 4 {
            return ContractResponse::error("incorrect number of arguments, expecting 4");
        }
        let (Some(a), Some(b)) = (parse_decimal(&args[1]), parse_decimal(&args[3])) else {
            return ContractResponse::error("expecting integer value for asset holding");
        };
        if a < 0 || b < 0 {
            return ContractResponse::error("asset holdings must be non-negative");
        }
        stub.put_state(&String::from_utf8_lossy(&args[0]), a.to_string().as_bytes());
        stub.put_state(&String::from_utf8_lossy(&args[2]), b.to_string().as_bytes());
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        const TABLE: &[(&str, Handler)] = &[("transfer", transfer), ("balances", balances), ("query", query)];
        route(stub, args, TABLE)
    }

    fn literals(&self) -> Vec<Vec<u8>> {
        literals(&["transfer", "balances", "query", FROM, TO])
    }
}

/// Balances must reflect exactly the accepted transfer.
fn compare_transfer(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    let amount = parse_decimal(&published[0]).ok_or("amount field unparsable")?;
    let text = String::from_utf8_lossy(payload);
    let (a, b) = text.split_once(',').ok_or("balances field malformed")?;
    let a: i64 = a.parse().map_err(|_| "balance A field malformed")?;
    let b: i64 = b.parse().map_err(|_| "balance B field malformed")?;
    if a != FROM_INITIAL - amount {
        return Err("field A differs".into());
    }
    if b != TO_INITIAL + amount {
        return Err("field B differs".into());
    }
    Ok(())
}

pub fn target_example01() -> TargetSpec {
    TargetSpec {
        contract: Box::new(Example01),
        fixture: literals(&[FROM, "100", TO, "200"]),
        groups: vec![TestGroup::new(
            "transfer",
            "transfer",
            "balances",
            1,
            0,
            compare_transfer,
        )],
        seeds: vec![
            UnitCase::new("T1", &["transfer", "10"]),
            UnitCase::new("T2", &["transfer", "100"]),
        ],
        expected_bugs: Vec::new(),
        witness: None,
    }
}
