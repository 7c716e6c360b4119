//! Byte-level mutation operators and operator selection.
//!
//! Each operator is split into a random choice of positions (in
//! [`apply_operator`]) and a pure edit helper in [`edit`], so individual
//! edits can be exercised with exact positions.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// One of the 20 byte-level mutation operators, numbered 0..=19.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MutatorId(u8);

impl MutatorId {
    pub const COUNT: u8 = 20;

    pub const REMOVE_RANGE: Self = Self(0);
    pub const INSERT_RANDOM: Self = Self(1);
    pub const DUPLICATE_RANGE: Self = Self(2);
    pub const COPY_RANGE: Self = Self(3);
    pub const BIT_FLIP: Self = Self(4);
    pub const SET_BYTE: Self = Self(5);
    pub const SWAP_BYTES: Self = Self(6);
    pub const ARITH_U8: Self = Self(7);
    pub const ARITH_U16: Self = Self(8);
    pub const ARITH_U32: Self = Self(9);
    pub const ARITH_U64: Self = Self(10);
    pub const INTERESTING_U8: Self = Self(11);
    pub const INTERESTING_U16: Self = Self(12);
    pub const INTERESTING_U32: Self = Self(13);
    pub const REPLACE_DIGIT: Self = Self(14);
    pub const REPLACE_NUMBER: Self = Self(15);
    pub const SPLICE: Self = Self(16);
    pub const INSERT_PART: Self = Self(17);
    pub const INSERT_LITERAL: Self = Self(18);
    pub const REPLACE_LITERAL: Self = Self(19);

    pub fn new(id: u32) -> Result<Self> {
        if id < u32::from(Self::COUNT) {
            Ok(Self(id as u8))
        } else {
            Err(Error::InvalidMutatorId(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = MutatorId> {
        (0..Self::COUNT).map(MutatorId)
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 20] = [
            "remove a range of bytes",
            "insert a range of random bytes",
            "duplicate a range of bytes",
            "copy a range of bytes",
            "bit flip",
            "set a byte to a random value",
            "swap 2 bytes",
            "add/subtract from a byte",
            "add/subtract from a uint16",
            "add/subtract from a uint32",
            "add/subtract from a uint64",
            "replace a byte with an interesting value",
            "replace a uint16 with an interesting value",
            "replace a uint32 with an interesting value",
            "replace an ascii digit with another digit",
            "replace a multi-byte ascii number with another number",
            "splice another input",
            "insert a part of another input",
            "insert a literal",
            "replace with literal",
        ];
        NAMES[self.0 as usize]
    }

    /// Operators that need a donor input from the corpus.
    pub fn needs_donor(self) -> bool {
        matches!(self, Self::SPLICE | Self::INSERT_PART)
    }
}

impl fmt::Display for MutatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const INTERESTING_8: &[u8] = &[0, 1, 16, 32, 64, 100, 127, 128, 255];

pub const INTERESTING_16: &[u16] = &[
    0, 1, 16, 32, 64, 100, 127, 128, 255, 256, 512, 1000, 1024, 4096, 32767, 32768, 65535,
];

pub const INTERESTING_32: &[u32] = &[
    0,
    1,
    16,
    32,
    64,
    100,
    127,
    128,
    255,
    256,
    512,
    1000,
    1024,
    4096,
    32767,
    32768,
    65535,
    65536,
    100_663_045,
    2_147_483_647,
    2_147_483_648,
    4_294_967_295,
];

/// Largest magnitude of the delta used by the add/subtract operators.
pub const ARITH_MAX: i64 = 35;

const INSERT_RANDOM_MAX: usize = 16;
const FALLBACK_INSERT_MAX: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutatorConfig {
    enabled: Vec<MutatorId>,
    pub max_input_len: usize,
    pub stack_max: usize,
}

impl Default for MutatorConfig {
    /// Every operator except 1 and 19, 4096-byte inputs, up to 4 stacked
    /// operators per round.
    fn default() -> Self {
        Self {
            enabled: default_enabled(),
            max_input_len: 4096,
            stack_max: 4,
        }
    }
}

fn default_enabled() -> Vec<MutatorId> {
    MutatorId::all()
        .filter(|id| *id != MutatorId::INSERT_RANDOM && *id != MutatorId::REPLACE_LITERAL)
        .collect()
}

impl MutatorConfig {
    pub fn new(
        enabled: impl IntoIterator<Item = MutatorId>,
        max_input_len: usize,
        stack_max: usize,
    ) -> Result<Self> {
        let mut enabled: Vec<_> = enabled.into_iter().collect();
        enabled.sort_unstable();
        enabled.dedup();
        if enabled.is_empty() {
            return Err(Error::Config("enabled mutator set is empty".into()));
        }
        if max_input_len == 0 {
            return Err(Error::Config("max input length must be at least 1".into()));
        }
        if stack_max == 0 {
            return Err(Error::Config("stack max must be at least 1".into()));
        }
        Ok(Self {
            enabled,
            max_input_len,
            stack_max,
        })
    }

    /// Single-operator configuration, as used when benchmarking operators.
    pub fn only(id: MutatorId) -> Self {
        Self {
            enabled: vec![id],
            ..Self::default()
        }
    }

    pub fn enabled(&self) -> &[MutatorId] {
        &self.enabled
    }

    pub fn with_enabled(mut self, enabled: MutatorSet) -> Self {
        self.enabled = enabled.0;
        self
    }
}

/// Parsed `--mutators` value: `all`, or a comma-separated list of ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutatorSet(Vec<MutatorId>);

impl MutatorSet {
    pub fn ids(&self) -> &[MutatorId] {
        &self.0
    }
}

impl Default for MutatorSet {
    fn default() -> Self {
        Self(default_enabled())
    }
}

impl FromStr for MutatorSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self(MutatorId::all().collect()));
        }
        let mut ids = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let n: u32 = part
                .parse()
                .map_err(|_| Error::Config(format!("invalid mutator id {part:?}")))?;
            ids.push(MutatorId::new(n)?);
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::Config("enabled mutator set is empty".into()));
        }
        Ok(Self(ids))
    }
}

/// Literals for the insert/replace-with-literal operators.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    literals: Vec<Vec<u8>>,
    seen: HashSet<Vec<u8>>,
}

impl Dictionary {
    pub const MAX_LITERAL_LEN: usize = 64;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_literals<I, B>(literals: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[u8]>,
    {
        let mut dict = Self::new();
        for lit in literals {
            dict.insert(lit.as_ref());
        }
        dict
    }

    /// Adds a literal; duplicates and literals outside 1..=64 bytes are
    /// ignored. Returns whether it was added.
    pub fn insert(&mut self, literal: &[u8]) -> bool {
        if literal.is_empty() || literal.len() > Self::MAX_LITERAL_LEN {
            return false;
        }
        if !self.seen.insert(literal.to_vec()) {
            return false;
        }
        self.literals.push(literal.to_vec());
        true
    }

    pub fn literals(&self) -> &[Vec<u8>] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

/// Pure edits behind each operator. Positions are assumed valid.
pub mod edit {
    pub fn remove_range(input: &[u8], start: usize, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(input.len() - len);
        out.extend_from_slice(&input[..start]);
        out.extend_from_slice(&input[start + len..]);
        out
    }

    pub fn insert_bytes(input: &[u8], pos: usize, bytes: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(input.len() + bytes.len());
        out.extend_from_slice(&input[..pos]);
        out.extend_from_slice(bytes);
        out.extend_from_slice(&input[pos..]);
        out
    }

    /// Re-inserts `input[start..start + len]` immediately after itself.
    pub fn duplicate_range(input: &[u8], start: usize, len: usize) -> Vec<u8> {
        insert_bytes(input, start + len, &input[start..start + len])
    }

    /// Overwrites `input[dst..dst + len]` with the original
    /// `input[src..src + len]`.
    pub fn copy_range(input: &[u8], src: usize, dst: usize, len: usize) -> Vec<u8> {
        let mut out = input.to_vec();
        out.copy_within(src..src + len, dst);
        out
    }

    pub fn flip_bit(input: &[u8], bit: usize) -> Vec<u8> {
        let mut out = input.to_vec();
        out[bit / 8] ^= 1 << (bit % 8);
        out
    }

    pub fn set_byte(input: &[u8], pos: usize, value: u8) -> Vec<u8> {
        let mut out = input.to_vec();
        out[pos] = value;
        out
    }

    pub fn swap_bytes(input: &[u8], i: usize, j: usize) -> Vec<u8> {
        let mut out = input.to_vec();
        out.swap(i, j);
        out
    }

    pub fn read_lane(input: &[u8], offset: usize, width: usize, big_endian: bool) -> u64 {
        let lane = &input[offset..offset + width];
        let fold = |acc: u64, &b: &u8| (acc << 8) | u64::from(b);
        if big_endian {
            lane.iter().fold(0, fold)
        } else {
            lane.iter().rev().fold(0, fold)
        }
    }

    pub fn write_lane(input: &[u8], offset: usize, width: usize, big_endian: bool, value: u64) -> Vec<u8> {
        let mut out = input.to_vec();
        for k in 0..width {
            let byte = (value >> (8 * k)) as u8;
            let idx = if big_endian {
                offset + width - 1 - k
            } else {
                offset + k
            };
            out[idx] = byte;
        }
        out
    }

    /// Adds `delta` to a `width`-byte lane with wrapping arithmetic.
    pub fn add_to_lane(input: &[u8], offset: usize, width: usize, big_endian: bool, delta: i64) -> Vec<u8> {
        let mask = if width == 8 {
            u64::MAX
        } else {
            (1u64 << (8 * width)) - 1
        };
        let value = read_lane(input, offset, width, big_endian).wrapping_add(delta as u64) & mask;
        write_lane(input, offset, width, big_endian, value)
    }

    /// Replaces `input[start..end]` with the decimal rendering of `value`.
    pub fn replace_number(input: &[u8], start: usize, end: usize, value: u64) -> Vec<u8> {
        replace_range(input, start, end - start, value.to_string().as_bytes())
    }

    /// `input[..cut]` followed by `donor[donor_cut..]`.
    pub fn splice(input: &[u8], cut: usize, donor: &[u8], donor_cut: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(cut + donor.len() - donor_cut);
        out.extend_from_slice(&input[..cut]);
        out.extend_from_slice(&donor[donor_cut..]);
        out
    }

    pub fn replace_range(input: &[u8], start: usize, len: usize, with: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(input.len() - len + with.len());
        out.extend_from_slice(&input[..start]);
        out.extend_from_slice(with);
        out.extend_from_slice(&input[start + len..]);
        out
    }
}

/// Maximal runs of ASCII digits as `(start, end)` pairs.
pub fn digit_runs(input: &[u8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < input.len() {
        if input[i].is_ascii_digit() {
            let start = i;
            while i < input.len() && input[i].is_ascii_digit() {
                i += 1;
            }
            runs.push((start, i));
        } else {
            i += 1;
        }
    }
    runs
}

/// Applies operator `id` to `input` and truncates the result to
/// `max_input_len`.
///
/// Inapplicable operators fall back rather than returning the input
/// unchanged: an empty input always gets 1..=4 random bytes inserted; a
/// missing digit, number, donor or dictionary literal falls back to
/// [`MutatorId::SET_BYTE`]; operators that need more bytes than the input has
/// fall back to the random insertion.
pub fn apply_operator<R: Rng + ?Sized>(
    id: MutatorId,
    input: &[u8],
    rng: &mut R,
    donor: Option<&[u8]>,
    dict: &Dictionary,
    max_input_len: usize,
) -> Vec<u8> {
    let mut out = apply_untruncated(id, input, rng, donor, dict);
    out.truncate(max_input_len);
    out
}

fn apply_untruncated<R: Rng + ?Sized>(
    id: MutatorId,
    input: &[u8],
    rng: &mut R,
    donor: Option<&[u8]>,
    dict: &Dictionary,
) -> Vec<u8> {
    let len = input.len();
    match id {
        MutatorId::REMOVE_RANGE => {
            if len == 0 {
                return fallback_insert(input, rng);
            }
            let start = rng.gen_range(0..len);
            let n = rng.gen_range(1..=len - start);
            edit::remove_range(input, start, n)
        }
        MutatorId::INSERT_RANDOM => {
            let n = rng.gen_range(1..=INSERT_RANDOM_MAX);
            insert_random(input, rng, n)
        }
        MutatorId::DUPLICATE_RANGE => {
            if len == 0 {
                return fallback_insert(input, rng);
            }
            let start = rng.gen_range(0..len);
            let n = rng.gen_range(1..=len - start);
            edit::duplicate_range(input, start, n)
        }
        MutatorId::COPY_RANGE => {
            if len < 2 {
                return fallback_insert(input, rng);
            }
            let n = rng.gen_range(1..len);
            let positions = len - n + 1;
            let src = rng.gen_range(0..positions);
            let mut dst = rng.gen_range(0..positions - 1);
            if dst >= src {
                dst += 1;
            }
            edit::copy_range(input, src, dst, n)
        }
        MutatorId::BIT_FLIP => {
            if len == 0 {
                return fallback_insert(input, rng);
            }
            edit::flip_bit(input, rng.gen_range(0..len * 8))
        }
        MutatorId::SET_BYTE => set_random_byte(input, rng),
        MutatorId::SWAP_BYTES => {
            if len < 2 {
                return fallback_insert(input, rng);
            }
            let i = rng.gen_range(0..len);
            let mut j = rng.gen_range(0..len - 1);
            if j >= i {
                j += 1;
            }
            edit::swap_bytes(input, i, j)
        }
        MutatorId::ARITH_U8 | MutatorId::ARITH_U16 | MutatorId::ARITH_U32 | MutatorId::ARITH_U64 => {
            let width = 1usize << (id.get() - MutatorId::ARITH_U8.get());
            if len < width {
                return fallback_insert(input, rng);
            }
            let offset = rng.gen_range(0..=len - width);
            let big_endian = rng.gen::<bool>();
            let magnitude = rng.gen_range(1..=ARITH_MAX);
            let delta = if rng.gen::<bool>() { magnitude } else { -magnitude };
            edit::add_to_lane(input, offset, width, big_endian, delta)
        }
        MutatorId::INTERESTING_U8 => {
            if len == 0 {
                return fallback_insert(input, rng);
            }
            let value = INTERESTING_8[rng.gen_range(0..INTERESTING_8.len())];
            edit::set_byte(input, rng.gen_range(0..len), value)
        }
        MutatorId::INTERESTING_U16 => {
            let value = u64::from(INTERESTING_16[rng.gen_range(0..INTERESTING_16.len())]);
            interesting_lane(input, rng, 2, value)
        }
        MutatorId::INTERESTING_U32 => {
            let value = u64::from(INTERESTING_32[rng.gen_range(0..INTERESTING_32.len())]);
            interesting_lane(input, rng, 4, value)
        }
        MutatorId::REPLACE_DIGIT => {
            let digits: Vec<usize> = (0..len).filter(|&i| input[i].is_ascii_digit()).collect();
            if digits.is_empty() {
                return set_random_byte(input, rng);
            }
            let pos = digits[rng.gen_range(0..digits.len())];
            let old = input[pos] - b'0';
            let new = (old + rng.gen_range(1..=9)) % 10;
            edit::set_byte(input, pos, b'0' + new)
        }
        MutatorId::REPLACE_NUMBER => {
            let runs: Vec<_> = digit_runs(input)
                .into_iter()
                .filter(|(s, e)| e - s >= 2)
                .collect();
            if runs.is_empty() {
                return set_random_byte(input, rng);
            }
            let (start, end) = runs[rng.gen_range(0..runs.len())];
            let value = u64::from(rng.gen::<u32>());
            edit::replace_number(input, start, end, value)
        }
        MutatorId::SPLICE => match donor.filter(|d| !d.is_empty()) {
            Some(donor) => {
                let cut = rng.gen_range(0..=len);
                let donor_cut = rng.gen_range(0..donor.len());
                edit::splice(input, cut, donor, donor_cut)
            }
            None => set_random_byte(input, rng),
        },
        MutatorId::INSERT_PART => match donor.filter(|d| !d.is_empty()) {
            Some(donor) => {
                let start = rng.gen_range(0..donor.len());
                let n = rng.gen_range(1..=donor.len() - start);
                let pos = rng.gen_range(0..=len);
                edit::insert_bytes(input, pos, &donor[start..start + n])
            }
            None => set_random_byte(input, rng),
        },
        MutatorId::INSERT_LITERAL => {
            if dict.is_empty() {
                return set_random_byte(input, rng);
            }
            let lit = &dict.literals()[rng.gen_range(0..dict.len())];
            let pos = rng.gen_range(0..=len);
            edit::insert_bytes(input, pos, lit)
        }
        MutatorId::REPLACE_LITERAL => {
            if dict.is_empty() || len == 0 {
                return set_random_byte(input, rng);
            }
            let lit = &dict.literals()[rng.gen_range(0..dict.len())];
            let start = rng.gen_range(0..len);
            let n = rng.gen_range(1..=len - start);
            edit::replace_range(input, start, n, lit)
        }
        _ => unreachable!("mutator ids are validated on construction"),
    }
}

fn insert_random<R: Rng + ?Sized>(input: &[u8], rng: &mut R, n: usize) -> Vec<u8> {
    let pos = rng.gen_range(0..=input.len());
    let bytes: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
    edit::insert_bytes(input, pos, &bytes)
}

fn fallback_insert<R: Rng + ?Sized>(input: &[u8], rng: &mut R) -> Vec<u8> {
    let n = rng.gen_range(1..=FALLBACK_INSERT_MAX);
    insert_random(input, rng, n)
}

fn set_random_byte<R: Rng + ?Sized>(input: &[u8], rng: &mut R) -> Vec<u8> {
    if input.is_empty() {
        return fallback_insert(input, rng);
    }
    let pos = rng.gen_range(0..input.len());
    let value = input[pos] ^ rng.gen_range(1..=255u8);
    edit::set_byte(input, pos, value)
}

fn interesting_lane<R: Rng + ?Sized>(input: &[u8], rng: &mut R, width: usize, value: u64) -> Vec<u8> {
    if input.len() < width {
        return fallback_insert(input, rng);
    }
    let offset = rng.gen_range(0..=input.len() - width);
    let big_endian = rng.gen::<bool>();
    edit::write_lane(input, offset, width, big_endian, value)
}

/// Uniform choice over the enabled set; a singleton set consumes no
/// randomness.
pub fn select_operator<R: Rng + ?Sized>(rng: &mut R, config: &MutatorConfig) -> MutatorId {
    match config.enabled() {
        [only] => *only,
        enabled => enabled[rng.gen_range(0..enabled.len())],
    }
}

/// Applies between 1 and `stack_max` operators in sequence. Donors for the
/// splice/insert-part operators come from `corpus_pick`.
pub fn mutate<R: Rng>(
    input: &[u8],
    rng: &mut R,
    corpus_pick: &mut dyn FnMut(&mut R) -> Option<Vec<u8>>,
    dict: &Dictionary,
    config: &MutatorConfig,
) -> Vec<u8> {
    let rounds = rng.gen_range(1..=config.stack_max);
    let mut data = input.to_vec();
    data.truncate(config.max_input_len);
    for _ in 0..rounds {
        let id = select_operator(rng, config);
        let donor = if id.needs_donor() { corpus_pick(rng) } else { None };
        data = apply_operator(id, &data, rng, donor.as_deref(), dict, config.max_input_len);
    }
    if data.is_empty() {
        data = fallback_insert(&data, rng);
        data.truncate(config.max_input_len);
    }
    data
}
