//! Diff oracle for the mutation operators. Each check looks only at the
//! input, the output and the material the operator was given, never at the
//! random choices the operator made.

#![allow(dead_code)]

use ledgerfuzz::mutation::{apply_operator, Dictionary, MutatorId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_LEN: usize = 4096;
const DELTA_MAX: u64 = 35;

const BYTE_VALUES: [u64; 9] = [0, 1, 16, 32, 64, 100, 127, 128, 255];
const WORD_EXTRA: [u64; 8] = [256, 512, 1000, 1024, 4096, 32767, 32768, 65535];
const DWORD_EXTRA: [u64; 5] = [65536, 100663045, 2147483647, 2147483648, 4294967295];

fn interesting(width: usize) -> Vec<u64> {
    let mut values = BYTE_VALUES.to_vec();
    if width >= 2 {
        values.extend(WORD_EXTRA);
    }
    if width >= 4 {
        values.extend(DWORD_EXTRA);
    }
    values
}

pub struct Case {
    pub input: Vec<u8>,
    pub donor: Option<Vec<u8>>,
    pub dict: Vec<Vec<u8>>,
    pub seed: u64,
}

fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn common_suffix(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count()
}

/// Positions `p` such that `out` is `inp` with `out[p..p + r]` inserted at
/// `p`, where `r = out.len() - inp.len() > 0`.
fn insertion_points(inp: &[u8], out: &[u8]) -> Vec<usize> {
    if out.len() <= inp.len() {
        return Vec::new();
    }
    let r = out.len() - inp.len();
    (0..=inp.len())
        .filter(|&p| out[..p] == inp[..p] && out[p + r..] == inp[p..])
        .collect()
}

fn is_deletion(inp: &[u8], out: &[u8]) -> bool {
    if out.len() >= inp.len() {
        return false;
    }
    let r = inp.len() - out.len();
    (0..=out.len()).any(|p| inp[..p] == out[..p] && inp[p + r..] == out[p..])
}

fn differing(inp: &[u8], out: &[u8]) -> Vec<usize> {
    (0..inp.len()).filter(|&i| inp[i] != out[i]).collect()
}

fn check_fallback_insert(inp: &[u8], out: &[u8]) -> Result<(), String> {
    let r = out.len().saturating_sub(inp.len());
    if !(1..=4).contains(&r) || insertion_points(inp, out).is_empty() {
        return Err(format!(
            "expected 1..=4 inserted bytes, got {} -> {} bytes",
            inp.len(),
            out.len()
        ));
    }
    Ok(())
}

fn check_set_byte(inp: &[u8], out: &[u8]) -> Result<(), String> {
    if inp.is_empty() {
        return check_fallback_insert(inp, out);
    }
    if out.len() != inp.len() {
        return Err("set byte changed the length".into());
    }
    let diff = differing(inp, out);
    if diff.len() != 1 {
        return Err(format!("set byte rewrote {} positions", diff.len()));
    }
    Ok(())
}

fn same_len(inp: &[u8], out: &[u8]) -> Result<(), String> {
    if inp.len() != out.len() {
        return Err(format!("length changed {} -> {}", inp.len(), out.len()));
    }
    Ok(())
}

fn lane(bytes: &[u8], big_endian: bool) -> u64 {
    let mut buf = [0u8; 8];
    if big_endian {
        buf[8 - bytes.len()..].copy_from_slice(bytes);
        u64::from_be_bytes(buf)
    } else {
        buf[..bytes.len()].copy_from_slice(bytes);
        u64::from_le_bytes(buf)
    }
}

/// Offsets whose `width`-byte window contains every differing position and
/// outside of which the buffers agree.
fn windows(inp: &[u8], out: &[u8], width: usize) -> Vec<usize> {
    let diff = differing(inp, out);
    (0..=inp.len() - width)
        .filter(|&o| diff.iter().all(|&d| d >= o && d < o + width))
        .collect()
}

fn check_arith(inp: &[u8], out: &[u8], width: usize) -> Result<(), String> {
    if inp.len() < width {
        return check_fallback_insert(inp, out);
    }
    same_len(inp, out)?;
    let modulus: u128 = 1u128 << (8 * width);
    for o in windows(inp, out, width) {
        for be in [false, true] {
            let before = lane(&inp[o..o + width], be) as u128;
            let after = lane(&out[o..o + width], be) as u128;
            let delta = (after + modulus - before) % modulus;
            let delta_ok = (1..=DELTA_MAX as u128).contains(&delta)
                || (modulus - delta <= DELTA_MAX as u128 && delta != 0);
            if delta_ok {
                return Ok(());
            }
        }
    }
    Err(format!(
        "no {width}-byte lane differs by a delta in [-35, 35] \\ 0"
    ))
}

fn check_interesting(inp: &[u8], out: &[u8], width: usize) -> Result<(), String> {
    if inp.len() < width {
        return check_fallback_insert(inp, out);
    }
    same_len(inp, out)?;
    let table = interesting(width);
    for o in windows(inp, out, width) {
        for be in [false, true] {
            if table.contains(&lane(&out[o..o + width], be)) {
                return Ok(());
            }
        }
    }
    Err(format!("no {width}-byte lane holds an interesting value"))
}

fn maximal_digit_runs(bytes: &[u8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for i in 0..=bytes.len() {
        let digit = i < bytes.len() && bytes[i].is_ascii_digit();
        match (digit, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    runs
}

fn is_canonical_u32(text: &[u8]) -> bool {
    if text.is_empty() || !text.iter().all(u8::is_ascii_digit) {
        return false;
    }
    if text.len() > 1 && text[0] == b'0' {
        return false;
    }
    std::str::from_utf8(text)
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .is_some_and(|v| v < 1 << 32)
}

fn is_substring(hay: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Checks the postcondition of operator `id` for one application.
pub fn check(id: u8, case: &Case, out: &[u8]) -> Result<(), String> {
    let inp = case.input.as_slice();
    let n = inp.len();
    let donor = case.donor.as_deref().filter(|d| !d.is_empty());
    match id {
        0 => {
            if n == 0 {
                return check_fallback_insert(inp, out);
            }
            if !is_deletion(inp, out) {
                return Err("output is not the input with one range removed".into());
            }
            Ok(())
        }
        1 => {
            if insertion_points(inp, out).is_empty() {
                return Err("output is not the input with one run inserted".into());
            }
            Ok(())
        }
        2 => {
            if n == 0 {
                return check_fallback_insert(inp, out);
            }
            if out.len() <= n {
                return Err("duplicate did not grow the input".into());
            }
            let r = out.len() - n;
            if r > n {
                return Err("duplicate grew by more than the input length".into());
            }
            let ok = (0..=n - r).any(|i| {
                out[..i + r] == inp[..i + r]
                    && out[i + r..i + 2 * r] == inp[i..i + r]
                    && out[i + 2 * r..] == inp[i + r..]
            });
            if !ok {
                return Err("no range appears re-inserted right after itself".into());
            }
            Ok(())
        }
        3 => {
            if n < 2 {
                return check_fallback_insert(inp, out);
            }
            same_len(inp, out)?;
            let p = common_prefix(inp, out);
            let s = common_suffix(inp, out);
            for dst in 0..=p.min(n - 1) {
                let min_r = n.saturating_sub(s).saturating_sub(dst).max(1);
                for r in min_r..=n - dst {
                    if out[dst + r..] != inp[dst + r..] {
                        continue;
                    }
                    for src in 0..=n - r {
                        if src != dst && out[dst..dst + r] == inp[src..src + r] {
                            return Ok(());
                        }
                    }
                }
            }
            Err("no range of the input overwrites another range".into())
        }
        4 => {
            if n == 0 {
                return check_fallback_insert(inp, out);
            }
            same_len(inp, out)?;
            let bits: u32 = inp.iter().zip(out).map(|(a, b)| (a ^ b).count_ones()).sum();
            if bits != 1 {
                return Err(format!("{bits} bits differ"));
            }
            Ok(())
        }
        5 => check_set_byte(inp, out),
        6 => {
            if n < 2 {
                return check_fallback_insert(inp, out);
            }
            same_len(inp, out)?;
            let mut a = inp.to_vec();
            let mut b = out.to_vec();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err("byte multiset changed".into());
            }
            match differing(inp, out).as_slice() {
                [] => {
                    if a.windows(2).any(|w| w[0] == w[1]) {
                        Ok(())
                    } else {
                        Err("no bytes moved although all bytes are distinct".into())
                    }
                }
                [i, j] if inp[*i] == out[*j] && inp[*j] == out[*i] => Ok(()),
                d => Err(format!("{} positions differ", d.len())),
            }
        }
        7..=10 => check_arith(inp, out, 1 << (id - 7)),
        11 => check_interesting(inp, out, 1),
        12 => check_interesting(inp, out, 2),
        13 => check_interesting(inp, out, 4),
        14 => {
            if !inp.iter().any(u8::is_ascii_digit) {
                return check_set_byte(inp, out);
            }
            same_len(inp, out)?;
            match differing(inp, out).as_slice() {
                [i] if inp[*i].is_ascii_digit() && out[*i].is_ascii_digit() => Ok(()),
                d => Err(format!(
                    "expected one digit replaced by another, {} positions differ",
                    d.len()
                )),
            }
        }
        15 => {
            let runs: Vec<_> = maximal_digit_runs(inp)
                .into_iter()
                .filter(|(s, e)| e - s >= 2)
                .collect();
            if runs.is_empty() {
                return check_set_byte(inp, out);
            }
            for (s, e) in runs {
                let tail = n - e;
                if out.len() < s + tail || out[..s] != inp[..s] || out[out.len() - tail..] != inp[e..] {
                    continue;
                }
                if is_canonical_u32(&out[s..out.len() - tail]) {
                    return Ok(());
                }
            }
            Err("no digit run replaced by a decimal below 2^32".into())
        }
        16 => {
            let Some(donor) = donor else {
                return check_set_byte(inp, out);
            };
            let ok = (0..=n).any(|i| out.len() > i && out[..i] == inp[..i] && donor.ends_with(&out[i..]));
            if !ok {
                return Err("output is not an input prefix followed by a donor suffix".into());
            }
            Ok(())
        }
        17 => {
            let Some(donor) = donor else {
                return check_set_byte(inp, out);
            };
            let r = out.len().saturating_sub(n);
            let ok = insertion_points(inp, out)
                .into_iter()
                .any(|p| is_substring(donor, &out[p..p + r]));
            if !ok {
                return Err("inserted run is not a slice of the donor".into());
            }
            Ok(())
        }
        18 => {
            if case.dict.is_empty() {
                return check_set_byte(inp, out);
            }
            let r = out.len().saturating_sub(n);
            let ok = insertion_points(inp, out)
                .into_iter()
                .any(|p| case.dict.iter().any(|l| l.as_slice() == &out[p..p + r]));
            if !ok {
                return Err("inserted run is not a dictionary literal".into());
            }
            Ok(())
        }
        19 => {
            if case.dict.is_empty() || n == 0 {
                return check_set_byte(inp, out);
            }
            for lit in &case.dict {
                if out.len() < lit.len() || out.len() - lit.len() >= n {
                    continue;
                }
                let removed = n - (out.len() - lit.len());
                for start in 0..=n - removed {
                    if out[..start] == inp[..start]
                        && out[start..start + lit.len()] == lit[..]
                        && out[start + lit.len()..] == inp[start + removed..]
                    {
                        return Ok(());
                    }
                }
            }
            Err("no range replaced by a dictionary literal".into())
        }
        _ => Err(format!("unknown operator {id}")),
    }
}

fn random_bytes(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    let style = rng.gen_range(0..4);
    (0..len)
        .map(|_| match style {
            0 => rng.gen(),
            1 => b"0123456789"[rng.gen_range(0..10)],
            2 => b"ab 0123456789-x"[rng.gen_range(0..15)],
            _ => b"AAB"[rng.gen_range(0..3)],
        })
        .collect()
}

/// Generates a case; inputs stay short enough that no output is truncated.
pub fn gen_case(rng: &mut ChaCha8Rng, id: u8) -> Case {
    let max_len = if id == 3 { 40 } else { 96 };
    let input = random_bytes(rng, max_len);
    let donor = match rng.gen_range(0..5) {
        0 => None,
        1 => Some(Vec::new()),
        _ => Some(random_bytes(rng, 48)),
    };
    let dict = if rng.gen_bool(0.2) {
        Vec::new()
    } else {
        let mut lits: Vec<Vec<u8>> = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let mut lit = random_bytes(rng, 12);
            if lit.is_empty() {
                lit.push(b'x');
            }
            if !lits.contains(&lit) {
                lits.push(lit);
            }
        }
        lits
    };
    Case {
        input,
        donor,
        dict,
        seed: rng.gen(),
    }
}

pub fn apply(id: u8, case: &Case) -> Vec<u8> {
    let dict = Dictionary::from_literals(case.dict.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    let op = MutatorId::new(u32::from(id)).expect("valid id");
    apply_operator(op, &case.input, &mut rng, case.donor.as_deref(), &dict, MAX_LEN)
}

/// Runs `cases` random cases for operator `id`. Returns the number of
/// violations and a description of the first few.
pub fn run_operator(id: u8, cases: usize, master_seed: u64) -> (usize, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ u64::from(id).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut violations = 0;
    let mut examples = Vec::new();
    for _ in 0..cases {
        let case = gen_case(&mut rng, id);
        let out = apply(id, &case);
        let again = apply(id, &case);
        let verdict = if out != again {
            Err("not deterministic for a fixed seed".to_owned())
        } else {
            check(id, &case, &out)
        };
        if let Err(why) = verdict {
            violations += 1;
            if examples.len() < 3 {
                examples.push(format!(
                    "op {id}: {why}; input {:?} output {:?}",
                    case.input.escape_ascii().to_string(),
                    out.escape_ascii().to_string()
                ));
            }
        }
    }
    (violations, examples)
}

/// Truncation: whatever the operator, the output respects the length cap.
pub fn run_truncation(id: u8, cases: usize, master_seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed.wrapping_add(u64::from(id)));
    let op = MutatorId::new(u32::from(id)).expect("valid id");
    let mut violations = 0;
    for _ in 0..cases {
        let cap = rng.gen_range(1..=16);
        let len = rng.gen_range(0..=cap);
        let input: Vec<u8> = (0..len).map(|_| b"12a"[rng.gen_range(0..3)]).collect();
        let donor: Vec<u8> = (0..rng.gen_range(1..40)).map(|_| rng.gen()).collect();
        let dict = Dictionary::from_literals([b"literal-value-long".to_vec(), b"7".to_vec()]);
        let mut op_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let out = apply_operator(op, &input, &mut op_rng, Some(&donor), &dict, cap);
        if out.len() > cap {
            violations += 1;
        }
    }
    violations
}
