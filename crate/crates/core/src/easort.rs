//! k-pass external approximate sorting.
//!
//! Each pass splits every unsorted bucket file into at most
//! `p = floor((m - b) / (b + 1))` sub-buckets using pivots drawn from the
//! first memory-load of the file, so that one buffer block per bucket, one
//! input block and the pivots fit in memory together. Buckets smaller than
//! `m` are sorted internally instead and never touched again. After `k`
//! passes the concatenated bucket files are ordered between buckets and
//! unordered inside them, except that every written block is sorted.
//!
//! Bucket ranges are half-open `(lower, upper]` over the sort key. Keys
//! equal to a pivot go to the lower bucket, so routing is total even with
//! duplicate keys.

use std::fmt;

use crate::error::{Error, Result};
use crate::io_sim::{BlockStore, FileId, IoParams};
use crate::perm::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EasortConfig {
    /// Number of passes, at least 1.
    pub k: usize,
    /// Seed for input generation; the pass itself is deterministic.
    pub seed: u64,
}

impl EasortConfig {
    pub fn new(k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k >= 1 violated".into()));
        }
        Ok(Self { k, seed })
    }
}

/// One bucket of an [`ApproxRun`]. `None` bounds stand for -inf / +inf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketDescriptor {
    pub file: FileId,
    /// Exclusive lower key bound.
    pub lower: Option<u64>,
    /// Inclusive upper key bound.
    pub upper: Option<u64>,
    pub count: usize,
    pub fully_sorted: bool,
}

impl BucketDescriptor {
    pub fn contains_key(&self, key: u64) -> bool {
        self.lower.is_none_or(|lo| key > lo) && self.upper.is_none_or(|hi| key <= hi)
    }

    /// Whether the inclusive key interval `[lo, hi]` meets this bucket's range.
    pub fn overlaps(&self, lo: u64, hi: u64) -> bool {
        self.lower.is_none_or(|l| hi > l) && self.upper.is_none_or(|u| lo <= u)
    }

    /// Whether two bucket ranges share at least one key.
    pub fn ranges_meet(&self, other: &BucketDescriptor) -> bool {
        let lo = match (self.lower, other.lower) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.upper, other.upper) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        match (lo, hi) {
            (Some(l), Some(h)) => l < h,
            (Some(l), None) => l < u64::MAX,
            _ => true,
        }
    }
}

/// The output of [`easort`]: bucket files in global key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxRun {
    pub buckets: Vec<BucketDescriptor>,
    pub params: IoParams,
    pub passes_used: usize,
}

impl ApproxRun {
    pub fn len(&self) -> usize {
        self.buckets.iter().map(|b| b.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tab-separated manifest, one bucket per line:
    /// `file  lower  upper  count  sorted`.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for bk in &self.buckets {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                bk.file,
                bk.lower.map_or_else(|| "-inf".to_string(), |v| v.to_string()),
                bk.upper.map_or_else(|| "+inf".to_string(), |v| v.to_string()),
                bk.count,
                bk.fully_sorted
            ));
        }
        out
    }

    pub fn from_manifest(text: &str, params: IoParams, passes_used: usize) -> Result<Self> {
        let bad = |line: &str| Error::InvalidParams(format!("malformed manifest line: {line:?}"));
        let mut buckets = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(bad(line));
            }
            let bound = |s: &str, inf: &str| -> Result<Option<u64>> {
                if s == inf {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(line))
                }
            };
            buckets.push(BucketDescriptor {
                file: FileId(cols[0].parse().map_err(|_| bad(line))?),
                lower: bound(cols[1], "-inf")?,
                upper: bound(cols[2], "+inf")?,
                count: cols[3].parse().map_err(|_| bad(line))?,
                fully_sorted: cols[4].parse().map_err(|_| bad(line))?,
            });
        }
        Ok(Self {
            buckets,
            params,
            passes_used,
        })
    }

    /// Concatenation of all bucket files, read without charging I/O.
    pub fn output_keys(&self, store: &BlockStore) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(self.len());
        for bk in &self.buckets {
            out.extend(store.contents_unmetered(bk.file)?);
        }
        Ok(out)
    }

    /// Checks the structural invariants against the store contents.
    pub fn validate_by(&self, store: &BlockStore, key_of: impl Fn(u64) -> u64) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        for pair in self.buckets.windows(2) {
            if pair[0].upper != pair[1].lower || pair[0].upper.is_none() {
                return fail(format!("bucket ranges not consecutive at file {}", pair[1].file));
            }
        }
        if let Some(first) = self.buckets.first() {
            if first.lower.is_some() || self.buckets.last().unwrap().upper.is_some() {
                return fail("bucket ranges must span -inf..+inf".into());
            }
        }
        for bk in &self.buckets {
            let keys = store.contents_unmetered(bk.file)?;
            if keys.len() != bk.count {
                return fail(format!("file {} holds {} keys, descriptor says {}", bk.file, keys.len(), bk.count));
            }
            if let Some(k) = keys.iter().find(|&&v| !bk.contains_key(key_of(v))) {
                return fail(format!("key {k} outside range of file {}", bk.file));
            }
            if bk.fully_sorted && keys.windows(2).any(|w| w[0] > w[1]) {
                return fail(format!("file {} flagged sorted but is not", bk.file));
            }
            for block in store.blocks_unmetered(bk.file)? {
                if block.windows(2).any(|w| w[0] > w[1]) {
                    return fail(format!("unsorted block in file {}", bk.file));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self, store: &BlockStore) -> Result<()> {
        self.validate_by(store, |v| v)
    }
}

impl fmt::Display for ApproxRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.manifest())
    }
}

/// Buckets per pass: `floor((m - b) / (b + 1))`. Requires `1 < b < m/2`.
pub fn compute_bucket_count(m: usize, b: usize) -> Result<usize> {
    if b <= 1 || 2 * b >= m {
        return Err(Error::InvalidParams(format!(
            "1 < b < m/2 violated (m = {m}, b = {b})"
        )));
    }
    Ok((m - b) / (b + 1))
}

/// Even-division pivots: the sample values at 1-indexed positions
/// `floor(i * s / p)` for `i = 1..p`.
pub fn select_pivots(sample: &[u64], p: usize) -> Result<Vec<u64>> {
    let s = sample.len();
    if p == 0 || s < p {
        return Err(Error::SampleTooSmall {
            sample: s,
            buckets: p,
        });
    }
    Ok((1..p).map(|i| sample[i * s / p - 1]).collect())
}

/// Runs one pass over the bucket `parent`, replacing its file by sub-bucket
/// files. Returns the non-empty sub-buckets in key order.
pub fn partition_pass(store: &mut BlockStore, parent: &BucketDescriptor) -> Result<Vec<BucketDescriptor>> {
    partition_pass_by(store, parent, |v| v)
}

/// [`partition_pass`] over the sort key `key_of(value)`. Blocks are still
/// sorted by full value, which agrees with key order whenever `key_of` is
/// monotone.
pub fn partition_pass_by(
    store: &mut BlockStore,
    parent: &BucketDescriptor,
    key_of: impl Fn(u64) -> u64,
) -> Result<Vec<BucketDescriptor>> {
    let params = store.params();
    let (m, b) = (params.m(), params.b());
    let file = parent.file;
    let count = store.item_count(file)?;
    let nblocks = store.block_count(file)?;
    let mut ws = store.workspace();

    if count < m {
        let mut items = Vec::with_capacity(count);
        for i in 0..nblocks {
            items.extend(store.read_block(file, i, &mut ws)?);
        }
        items.sort_unstable();
        let out = store.create_file();
        for chunk in items.chunks(b) {
            store.write_block(out, chunk, &mut ws)?;
        }
        store.delete_file(file)?;
        return Ok(vec![BucketDescriptor {
            file: out,
            lower: parent.lower,
            upper: parent.upper,
            count,
            fully_sorted: true,
        }]);
    }

    let p = compute_bucket_count(m, b)?;
    // whole blocks only, so the sample never exceeds m items
    let sample_blocks = (m / b).min(nblocks);
    let mut sample = Vec::with_capacity(m);
    for i in 0..sample_blocks {
        sample.extend(store.read_block(file, i, &mut ws)?);
    }
    let mut sample_keys: Vec<u64> = sample.iter().map(|&v| key_of(v)).collect();
    sample_keys.sort_unstable();
    let pivots = select_pivots(&sample_keys, p)?;

    let outputs: Vec<FileId> = (0..p).map(|_| store.create_file()).collect();
    let mut buffers: Vec<Vec<u64>> = vec![Vec::with_capacity(b); p];
    let mut counts = vec![0usize; p];

    let mut route = |store: &mut BlockStore, ws: &mut crate::io_sim::Workspace, v: u64| -> Result<()> {
        let key = key_of(v);
        let i = pivots.partition_point(|&piv| piv < key);
        buffers[i].push(v);
        counts[i] += 1;
        if buffers[i].len() == b {
            buffers[i].sort_unstable();
            store.write_block(outputs[i], &buffers[i], ws)?;
            buffers[i].clear();
        }
        Ok(())
    };

    // sample items are routed from memory; pivots are views into the sample until it drains
    for v in sample {
        route(store, &mut ws, v)?;
    }
    ws.acquire(pivots.len())?;
    for i in sample_blocks..nblocks {
        for v in store.read_block(file, i, &mut ws)? {
            route(store, &mut ws, v)?;
        }
    }
    drop(route);
    for (i, buf) in buffers.iter_mut().enumerate() {
        if !buf.is_empty() {
            buf.sort_unstable();
            store.write_block(outputs[i], buf, &mut ws)?;
            buf.clear();
        }
    }
    ws.release(pivots.len())?;
    debug_assert_eq!(ws.resident(), 0);
    store.delete_file(file)?;

    let mut children: Vec<BucketDescriptor> = Vec::with_capacity(p);
    let mut pending_lower = parent.lower;
    for i in 0..p {
        let upper = if i + 1 < p { Some(pivots[i]) } else { parent.upper };
        if counts[i] == 0 {
            store.delete_file(outputs[i])?;
            // an empty range is absorbed by its predecessor, or by the next bucket
            match children.last_mut() {
                Some(prev) => prev.upper = upper,
                None => pending_lower = parent.lower,
            }
            continue;
        }
        children.push(BucketDescriptor {
            file: outputs[i],
            lower: if children.is_empty() { pending_lower } else { children.last().unwrap().upper },
            upper,
            count: counts[i],
            fully_sorted: false,
        });
    }
    Ok(children)
}

/// Approximately sorts the file `input`, which must hold `params.n()` keys.
pub fn easort(store: &mut BlockStore, input: FileId, cfg: &EasortConfig) -> Result<ApproxRun> {
    easort_by(store, input, cfg, |v| v)
}

/// [`easort`] with bucket ranges over `key_of(value)`.
pub fn easort_by(
    store: &mut BlockStore,
    input: FileId,
    cfg: &EasortConfig,
    key_of: impl Fn(u64) -> u64 + Copy,
) -> Result<ApproxRun> {
    if cfg.k == 0 {
        return Err(Error::InvalidParams("k >= 1 violated".into()));
    }
    let params = store.params();
    let count = store.item_count(input)?;
    if count != params.n() {
        return Err(Error::InvalidParams(format!(
            "input holds {count} keys but n = {}",
            params.n()
        )));
    }
    let mut buckets = vec![BucketDescriptor {
        file: input,
        lower: None,
        upper: None,
        count,
        fully_sorted: false,
    }];
    let mut passes_used = 0;
    for _ in 0..cfg.k {
        if buckets.iter().all(|bk| bk.fully_sorted) {
            break;
        }
        let mut next = Vec::with_capacity(buckets.len());
        for bk in buckets {
            if bk.fully_sorted {
                next.push(bk);
            } else {
                next.extend(partition_pass_by(store, &bk, key_of)?);
            }
        }
        buckets = next;
        passes_used += 1;
    }
    Ok(ApproxRun {
        buckets,
        params,
        passes_used,
    })
}

/// Maps the run's concatenated output onto a permutation for distortion
/// measurement. Reads are not charged.
pub fn materialize(run: &ApproxRun, store: &BlockStore) -> Result<Permutation> {
    Permutation::from_keys(&run.output_keys(store)?)
}
