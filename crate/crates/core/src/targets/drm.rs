//! Digital-rights registry. `addRight` accepts an empty id and stores the
//! record under the empty key, but `queryRight` treats an empty id as a
//! record that cannot exist.

use serde::{Deserialize, Serialize};

use super::{literals, text, ExpectedBug, TargetSpec};
use crate::contract::{route, Contract, ContractResponse, Handler, StubHandle};
use crate::corpus::CrashKind;
use crate::harness::{encode, TestGroup, UnitCase};

pub struct Drm;

#[derive(Debug, Serialize, Deserialize)]
struct Right {
    id: String,
    owner: String,
    title: String,
}

fn add_right(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let [id, owner, title] = params else {
        stub.cover(0x2001);
        return ContractResponse::error("incorrect number of arguments, expecting 3");
    };
    let (Some(id), Some(owner), Some(title)) = (text(id), text(owner), text(title)) else {
        stub.cover(0x2002);
        return ContractResponse::error("arguments must be printable strings");
    };
    if owner.is_empty() {
        stub.cover(0x2003);
        return ContractResponse::error("owner must be a non-empty string");
    }
    if stub.get_state(id).is_some() {
        stub.cover(0x2004);
        return ContractResponse::error("right already exists");
    }
    stub.cover(0x2005);
    let record = Right {
        id: id.to_owned(),
        owner: owner.to_owned(),
        title: title.to_owned(),
    };
    let bytes = serde_json::to_vec(&record).expect("serializing a string record");
    stub.put_state(id, &bytes);
    ContractResponse::ok(Vec::new())
}

fn query_right(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    let Some(id) = params.first().and_then(|p| text(p)) else {
        stub.cover(0x2011);
        return ContractResponse::error("incorrect arguments, expecting right id");
    };
    if id.is_empty() {
        stub.cover(0x2012);
        return ContractResponse::error("right not found");
    }
    match stub.get_state(id) {
        Some(bytes) => ContractResponse::ok(bytes),
        None => {
            stub.cover(0x2013);
            ContractResponse::error("right not found")
        }
    }
}

impl Contract for Drm {
    fn name(&self) -> &str {
        "drm"
    }

    fn init(&self, _stub: &mut StubHandle<'_>, _args: &[Vec<u8>]) -> ContractResponse {
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        const TABLE: &[(&str, Handler)] = &[("addRight", add_right), ("queryRight", query_right)];
        route(stub, args, TABLE)
    }

    fn literals(&self) -> Vec<Vec<u8>> {
        literals(&["addRight", "queryRight", "id", "owner", "title"])
    }
}

fn compare_right(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    let record: Right = serde_json::from_slice(payload).map_err(|_| "record unparsable".to_owned())?;
    if record.id.as_bytes() != published[0] {
        return Err("field id differs".into());
    }
    if record.owner.as_bytes() != published[1] {
        return Err("field owner differs".into());
    }
    if record.title.as_bytes() != published[2] {
        return Err("field title differs".into());
    }
    Ok(())
}

pub fn target_drm() -> TargetSpec {
    TargetSpec {
        contract: Box::new(Drm),
        fixture: Vec::new(),
        groups: vec![TestGroup::new(
            "right",
            "addRight",
            "queryRight",
            3,
            0,
            compare_right,
        )],
        seeds: vec![
            UnitCase::new("R1", &["addRight", "r1", "alice", "Song of Rice"]),
            UnitCase::new("R2", &["addRight", "r2024", "bob", "Harvest Notes"]),
        ],
        expected_bugs: vec![ExpectedBug {
            kind: CrashKind::OracleMismatch,
            message_contains: "right not found",
        }],
        witness: Some(encode(0, &["", "alice", "Song of Rice"])),
    }
}
