//! Hit-count coverage over a fixed 64Ki-site map.

/// Number of instrumentation sites.
pub const MAP_SIZE: usize = 1 << 16;

/// Saturating 8-bit hit counters indexed by site id.
///
/// The list of touched sites is tracked alongside the counters so that
/// resetting and comparing a sparse per-execution map is proportional to the
/// number of sites it actually hit.
#[derive(Clone)]
pub struct CoverageMap {
    counters: Box<[u8; MAP_SIZE]>,
    touched: Vec<u16>,
}

impl Default for CoverageMap {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for CoverageMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoverageMap")
            .field("cover_count", &self.cover_count())
            .finish()
    }
}

impl PartialEq for CoverageMap {
    fn eq(&self, other: &Self) -> bool {
        self.counters[..] == other.counters[..]
    }
}

impl Eq for CoverageMap {}

impl CoverageMap {
    pub fn new() -> Self {
        Self {
            counters: vec![0u8; MAP_SIZE]
                .into_boxed_slice()
                .try_into()
                .expect("map size"),
            touched: Vec::new(),
        }
    }

    /// Saturating-increments the counter for `site mod 65536`.
    pub fn record(&mut self, site: u32) {
        let idx = (site as usize) & (MAP_SIZE - 1);
        let c = &mut self.counters[idx];
        if *c == 0 {
            self.touched.push(idx as u16);
        }
        *c = c.saturating_add(1);
    }

    pub fn count(&self, site: u32) -> u8 {
        self.counters[(site as usize) & (MAP_SIZE - 1)]
    }

    /// Number of sites with a non-zero counter.
    pub fn cover_count(&self) -> usize {
        self.touched.len()
    }

    /// Site ids with a non-zero counter, in first-hit order.
    pub fn touched(&self) -> &[u16] {
        &self.touched
    }

    pub fn reset(&mut self) {
        for &idx in &self.touched {
            self.counters[idx as usize] = 0;
        }
        self.touched.clear();
    }

    /// Bucketized view of the map: for every hit site in ascending order, the
    /// big-endian site id followed by its bucket class.
    pub fn signature(&self) -> Vec<u8> {
        let mut sites = self.touched.clone();
        sites.sort_unstable();
        let mut out = Vec::with_capacity(sites.len() * 3);
        for site in sites {
            out.extend_from_slice(&site.to_be_bytes());
            out.push(bucket(self.counters[site as usize]));
        }
        out
    }

    /// Element-wise maximum. Bucket classes are monotone in the raw count, so
    /// this is also the maximum at the bucket level.
    pub fn merge(&mut self, other: &CoverageMap) {
        for &idx in &other.touched {
            let theirs = other.counters[idx as usize];
            let ours = &mut self.counters[idx as usize];
            if *ours == 0 {
                self.touched.push(idx);
            }
            *ours = (*ours).max(theirs);
        }
    }
}

/// Hit-count class of a raw counter: 0 for an unhit site, otherwise 1..=8 for
/// the ranges 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128-255.
pub fn bucket(count: u8) -> u8 {
    match count {
        0 => 0,
        1 => 1,
        2 => 2,
        3 => 3,
        4..=7 => 4,
        8..=15 => 5,
        16..=31 => 6,
        32..=127 => 7,
        128..=255 => 8,
    }
}

/// True iff some site in `run` reached a higher bucket than anything merged
/// into `global` so far; in that case `run` is merged into `global`.
pub fn is_new_coverage(global: &mut CoverageMap, run: &CoverageMap) -> bool {
    let new = run
        .touched
        .iter()
        .any(|&idx| bucket(run.counters[idx as usize]) > bucket(global.counters[idx as usize]));
    if new {
        global.merge(run);
    }
    new
}

/// Stable site id for framework-derived instrumentation (FNV-1a over the
/// parts, separated by 0xff).
pub fn site_id(parts: &[&[u8]]) -> u32 {
    let mut hash: u32 = 0x811c_9dc5;
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            hash ^= 0xff;
            hash = hash.wrapping_mul(0x0100_0193);
        }
        for &b in *part {
            hash ^= u32::from(b);
            hash = hash.wrapping_mul(0x0100_0193);
        }
    }
    hash
}
