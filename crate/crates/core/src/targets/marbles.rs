//! Marble registry. `addMarble` validates the size as a digit string, then
//! stores the re-rendered integer, so `"00"` comes back as `"0"`.

use serde::{Deserialize, Serialize};

use super::{literals, text, ExpectedBug, TargetSpec};
use crate::contract::{route, Contract, ContractResponse, Handler, StubHandle};
use crate::corpus::CrashKind;
use crate::harness::{encode, TestGroup, UnitCase};

pub struct Marbles;

#[derive(Debug, Serialize, Deserialize)]
struct Marble {
    name: String,
    color: String,
    size: String,
    owner: String,
}

fn add_marble(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let [name, color, size, owner] = params else {
        return ContractResponse::error("incorrect number of arguments, expecting 4");
    };
    let (Some(name), Some(color), Some(size), Some(owner)) =
        (text(name), text(color), text(size), text(owner))
    else {
        stub.cover(0x4001);
        return ContractResponse::error("arguments must be printable strings");
    };
    if name.is_empty() {
        stub.cover(0x4002);
        return ContractResponse::error("1st argument must be a non-empty string");
    }
    if color.is_empty() || owner.is_empty() {
        stub.cover(0x4003);
        return ContractResponse::error("color and owner must be non-empty strings");
    }
    if size.is_empty() || !size.bytes().all(|b| b.is_ascii_digit()) {
        stub.cover(0x4004);
        return ContractResponse::error("3rd argument must be a numeric string");
    }
    let Ok(size) = size.parse::<u64>() else {
        stub.cover(0x4005);
        return ContractResponse::error("3rd argument out of range");
    };
    if stub.get_state(name).is_some() {
        stub.cover(0x4006);
        return ContractResponse::error("this marble already exists");
    }
    stub.cover(0x4007);
    let marble = Marble {
        name: name.to_owned(),
        color: color.to_owned(),
        size: size.to_string(),
        owner: owner.to_owned(),
    };
    let bytes = serde_json::to_vec(&marble).expect("serializing a string record");
    stub.put_state(name, &bytes);
    ContractResponse::ok(Vec::new())
}

fn query_marble(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let Some(name) = params.first().and_then(|p| text(p)) else {
        return ContractResponse::error("incorrect arguments, expecting marble name");
    };
    match stub.get_state(name) {
        Some(v) => ContractResponse::ok(v),
        None => ContractResponse::error("marble does not exist"),
    }
}

impl Contract for Marbles {
    fn name(&self) -> &str {
        "marbles"
    }

    fn init(&self, _stub: &mut StubHandle<'_>, _args: &[Vec<u8>]) -> ContractResponse {
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        const TABLE: &[(&str, Handler)] = &[("addMarble", add_marble), ("queryMarble", query_marble)];
        route(stub, args, TABLE)
    }

    fn literals(&self) -> Vec<Vec<u8>> {
        literals(&["addMarble", "queryMarble", "blue", "red"])
    }
}

fn compare_marble(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    let marble: Marble = serde_json::from_slice(payload).map_err(|_| "record unparsable".to_owned())?;
    if marble.color.as_bytes() != published[1] {
        return Err("field color differs".into());
    }
    if marble.size.as_bytes() != published[2] {
        return Err("field size differs".into());
    }
    if marble.owner.as_bytes() != published[3] {
        return Err("field owner differs".into());
    }
    Ok(())
}

pub fn target_marbles() -> TargetSpec {
    TargetSpec {
        contract: Box::new(Marbles),
        fixture: Vec::new(),
        groups: vec![TestGroup::new(
            "marble",
            "addMarble",
            "queryMarble",
            4,
            0,
            compare_marble,
        )],
        seeds: vec![
            UnitCase::new("M1", &["addMarble", "marble1", "blue", "35", "tom"]),
            UnitCase::new("M2", &["addMarble", "marble2", "red", "7", "jerry"]),
        ],
        expected_bugs: vec![ExpectedBug {
            kind: CrashKind::OracleMismatch,
            message_contains: "field size differs",
        }],
        witness: Some(encode(0, &["marble1", "blue", "00", "tom"])),
    }
}
