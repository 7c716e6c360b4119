//! Food traceability records: product, ingredient and logistics info keyed
//! by food number.
//!
//! Records are stored as JSON produced by an HTML-safe encoder, which writes
//! `<`, `>` and `&` as `\u003c`, `\u003e` and `\u0026`. The read-back check
//! only undoes `\"` and `\\`, so any field containing one of those three
//! characters comes back in its escaped form.

use super::{literals, text, ExpectedBug, TargetSpec};
use crate::contract::{route, Contract, ContractResponse, Handler, StubHandle};
use crate::corpus::CrashKind;
use crate::harness::{encode, TestGroup, UnitCase};

pub struct Foodtrace;

const PRODUCT_FIELDS: &[&str] = &[
    "FoodID",
    "FoodName",
    "FoodSpec",
    "FoodMFGDate",
    "FoodEXPDate",
    "FoodLOT",
    "FoodQSID",
    "FoodMFRSName",
    "FoodProPrice",
    "FoodProPlace",
];

const INGREDIENT_FIELDS: &[&str] = &["FoodID", "IngID", "IngName"];

const LOGISTICS_FIELDS: &[&str] = &[
    "FoodID",
    "LogDepartureTm",
    "LogArrivalTm",
    "LogMission",
    "LogDeparturePl",
    "LogDest",
    "LogToWhom",
    "LogTime",
    "LogMT",
    "LogCompanyName",
    "LogCost",
];

struct RecordKind {
    prefix: &'static str,
    fields: &'static [&'static str],
    site: u32,
    missing: &'static str,
}

const PRODUCT: RecordKind = RecordKind {
    prefix: "pro_",
    fields: PRODUCT_FIELDS,
    site: 0x5100,
    missing: "product info not found",
};
const INGREDIENT: RecordKind = RecordKind {
    prefix: "ing_",
    fields: INGREDIENT_FIELDS,
    site: 0x5200,
    missing: "ingredient info not found",
};
const LOGISTICS: RecordKind = RecordKind {
    prefix: "log_",
    fields: LOGISTICS_FIELDS,
    site: 0x5300,
    missing: "logistics info not found",
};

/// JSON string literal with HTML-safe escaping.
fn push_json_string(out: &mut Vec<u8>, s: &str) {
    out.push(b'"');
    for c in s.chars() {
        match c {
            '"' => out.extend_from_slice(b"\\\""),
            '\\' => out.extend_from_slice(b"\\\\"),
            '<' => out.extend_from_slice(b"\\u003c"),
            '>' => out.extend_from_slice(b"\\u003e"),
            '&' => out.extend_from_slice(b"\\u0026"),
            '\n' => out.extend_from_slice(b"\\n"),
            '\r' => out.extend_from_slice(b"\\r"),
            '\t' => out.extend_from_slice(b"\\t"),
            c if (c as u32) < 0x20 => out.extend_from_slice(format!("\\u{:04x}", c as u32).as_bytes()),
            c => {
                let mut buf = [0u8; 4];
                out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
        }
    }
    out.push(b'"');
}

fn marshal(fields: &[&str], values: &[&str]) -> Vec<u8> {
    let mut out = vec![b'{'];
    for (i, (name, value)) in fields.iter().zip(values).enumerate() {
        if i > 0 {
            out.push(b',');
        }
        push_json_string(&mut out, name);
        out.push(b':');
        push_json_string(&mut out, value);
    }
    out.push(b'}');
    out
}

fn publish(stub: &mut StubHandle<'_>, kind: &RecordKind, params: &[Vec<u8>]) -> ContractResponse {
    if params.len() != kind.fields.len() {
        stub.cover(kind.site + 1);
        return ContractResponse::error(format!(
            "incorrect number of arguments, expecting {}",
            kind.fields.len()
        ));
    }
    let mut values = Vec::with_capacity(params.len());
    for (i, param) in params.iter().enumerate() {
        let Some(value) = text(param) else {
            stub.cover(kind.site + 0x10 + i as u32);
            return ContractResponse::error(format!("invalid characters in {}", kind.fields[i]));
        };
        if value.is_empty() {
            stub.cover(kind.site + 0x30 + i as u32);
            return ContractResponse::error(format!("{} must not be empty", kind.fields[i]));
        }
        values.push(value);
    }
    stub.cover(kind.site + 2);
    let record = marshal(kind.fields, &values);
    stub.put_state(&format!("{}{}", kind.prefix, values[0]), &record);
    ContractResponse::ok(Vec::new())
}

fn query(stub: &mut StubHandle<'_>, kind: &RecordKind, params: &[Vec<u8>]) -> ContractResponse {
    let Some(id) = params.first().and_then(|p| text(p)) else {
        stub.cover(kind.site + 3);
        return ContractResponse::error("incorrect arguments, expecting food id");
    };
    match stub.get_state(&format!("{}{id}", kind.prefix)) {
        Some(record) => ContractResponse::ok(record),
        None => {
            stub.cover(kind.site + 4);
            ContractResponse::error(kind.missing)
        }
    }
}

fn add_pro_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    publish(stub, &PRODUCT, params)
}

fn add_ing_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    publish(stub, &INGREDIENT, params)
}

fn add_log_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    publish(stub, &LOGISTICS, params)
}

fn query_pro_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    query(stub, &PRODUCT, params)
}

fn query_ing_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    query(stub, &INGREDIENT, params)
}

fn query_log_info(stub: &mut StubHandle<'_>, params: &[Vec<u8>]) -> ContractResponse {
    query(stub, &LOGISTICS, params)
}

impl Contract for Foodtrace {
    fn name(&self) -> &str {
        "foodtrace"
    }

    fn init(&self, _stub: &mut StubHandle<'_>, _args: &[Vec<u8>]) -> ContractResponse {
        ContractResponse::ok(Vec::new())
    }

    fn invoke(&self, stub: &mut StubHandle<'_>, args: &[Vec<u8>]) -> ContractResponse {
        const TABLE: &[(&str, Handler)] = &[
            ("addProInfo", add_pro_info),
            ("addIngInfo", add_ing_info),
            ("addLogInfo", add_log_info),
            ("queryProInfo", query_pro_info),
            ("queryIngInfo", query_ing_info),
            ("queryLogInfo", query_log_info),
        ];
        route(stub, args, TABLE)
    }

    fn literals(&self) -> Vec<Vec<u8>> {
        let mut lits = literals(&[
            "addProInfo",
            "addIngInfo",
            "addLogInfo",
            "queryProInfo",
            "queryIngInfo",
            "queryLogInfo",
        ]);
        for fields in [PRODUCT_FIELDS, INGREDIENT_FIELDS, LOGISTICS_FIELDS] {
            lits.extend(literals(fields));
        }
        lits
    }
}

/// Reads a flat JSON object of string fields, undoing only `\"` and `\\`.
/// Every other escape sequence is kept as written.
fn read_fields(record: &[u8]) -> Option<Vec<(String, String)>> {
    fn read_string(bytes: &[u8], pos: &mut usize) -> Option<String> {
        if bytes.get(*pos) != Some(&b'"') {
            return None;
        }
        *pos += 1;
        let mut out = Vec::new();
        loop {
            match *bytes.get(*pos)? {
                b'"' => {
                    *pos += 1;
                    return String::from_utf8(out).ok();
                }
                b'\\' => match *bytes.get(*pos + 1)? {
                    c @ (b'"' | b'\\') => {
                        out.push(c);
                        *pos += 2;
                    }
                    _ => {
                        out.push(b'\\');
                        *pos += 1;
                    }
                },
                c => {
                    out.push(c);
                    *pos += 1;
                }
            }
        }
    }

    let mut pos = 0;
    if record.first() != Some(&b'{') {
        return None;
    }
    pos += 1;
    let mut fields = Vec::new();
    if record.get(pos) == Some(&b'}') {
        return Some(fields);
    }
    loop {
        let name = read_string(record, &mut pos)?;
        if record.get(pos) != Some(&b':') {
            return None;
        }
        pos += 1;
        let value = read_string(record, &mut pos)?;
        fields.push((name, value));
        match record.get(pos)? {
            b',' => pos += 1,
            b'}' => return Some(fields),
            _ => return None,
        }
    }
}

fn compare_record(names: &[&str], published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    let fields = read_fields(payload).ok_or("record unparsable")?;
    if fields.len() != names.len() {
        return Err("record field count differs".into());
    }
    for ((name, value), (expected_name, expected)) in fields.iter().zip(names.iter().zip(published)) {
        if name != expected_name {
            return Err(format!("field {expected_name} missing"));
        }
        if value.as_bytes() != expected.as_slice() {
            return Err(format!("field {name} differs"));
        }
    }
    Ok(())
}

fn compare_product(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    compare_record(PRODUCT_FIELDS, published, payload)
}

fn compare_ingredient(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    compare_record(INGREDIENT_FIELDS, published, payload)
}

fn compare_logistics(published: &[Vec<u8>], payload: &[u8]) -> Result<(), String> {
    compare_record(LOGISTICS_FIELDS, published, payload)
}

pub fn target_foodtrace() -> TargetSpec {
    TargetSpec {
        contract: Box::new(Foodtrace),
        fixture: Vec::new(),
        groups: vec![
            TestGroup::new(
                "product",
                "addProInfo",
                "queryProInfo",
                PRODUCT_FIELDS.len(),
                0,
                compare_product,
            ),
            TestGroup::new(
                "ingredient",
                "addIngInfo",
                "queryIngInfo",
                INGREDIENT_FIELDS.len(),
                0,
                compare_ingredient,
            ),
            TestGroup::new(
                "logistics",
                "addLogInfo",
                "queryLogInfo",
                LOGISTICS_FIELDS.len(),
                0,
                compare_logistics,
            ),
        ],
        seeds: vec![
            UnitCase::new(
                "F1",
                &[
                    "addProInfo",
                    "001",
                    "MiGao",
                    "1",
                    "2020-01-01",
                    "2020-07-01",
                    "MP01",
                    "FX1234",
                    "MiGao",
                    "$10",
                    "Shanxi",
                ],
            ),
            UnitCase::new("I1", &["addIngInfo", "001", "M1", "NuoMi"]),
            UnitCase::new(
                "L1",
                &[
                    "addLogInfo",
                    "001",
                    "2020-01-02",
                    "2020-01-02",
                    "transport",
                    "Shanxi",
                    "Shaanxi",
                    "MiGao",
                    "10 days",
                    "Road transport",
                    "China Logistics Company Beijing",
                    "$190",
                ],
            ),
        ],
        expected_bugs: vec![ExpectedBug {
            kind: CrashKind::OracleMismatch,
            message_contains: "addIngInfo Failed",
        }],
        witness: Some(encode(1, &["001", ">", "NuoMi"])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn html_characters_are_escaped() {
        let record = marshal(&["IngID"], &[">"]);
        assert_eq!(record, br#"{"IngID":"\u003e"}"#);
        let record = marshal(&["a", "b"], &["A&B", "<\"\\"]);
        assert_eq!(record, br#"{"a":"A\u0026B","b":"\u003c\"\\"}"#);
    }

    #[test]
    fn reader_keeps_unicode_escapes() {
        let fields = read_fields(br#"{"IngID":"\u003e","x":"q\"\\"}"#).unwrap();
        assert_eq!(
            fields,
            vec![("IngID".into(), "\\u003e".into()), ("x".into(), "q\"\\".into())]
        );
        assert_eq!(read_fields(b"{}"), Some(vec![]));
        assert_eq!(read_fields(b"{\"a\"}"), None);
        assert_eq!(read_fields(b"not json"), None);
    }

    #[test]
    fn roundtrip_is_exact_without_html_characters() {
        let values = ["001", "quote \" and \\ backslash", "unicode \u{4e2d}"];
        let params: Vec<Vec<u8>> = values.iter().map(|v| v.as_bytes().to_vec()).collect();
        let record = marshal(INGREDIENT_FIELDS, &values);
        assert_eq!(compare_ingredient(&params, &record), Ok(()));
    }

    #[test]
    fn escaped_field_is_reported() {
        let params: Vec<Vec<u8>> = ["001", ">", "NuoMi"]
            .iter()
            .map(|v| v.as_bytes().to_vec())
            .collect();
        let record = marshal(INGREDIENT_FIELDS, &["001", ">", "NuoMi"]);
        assert_eq!(
            compare_ingredient(&params, &record),
            Err("field IngID differs".into())
        );
    }
}
