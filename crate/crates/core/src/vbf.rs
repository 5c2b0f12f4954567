//! VBF-Tree: a bulk-loaded tree index over an [`ApproxRun`].
//!
//! Internal nodes route on bucket upper bounds like a B+-tree. Each bucket
//! owns a chain of leaves; a leaf entry describes one data block of the
//! bucket with its exact `(min, max)` and a Bloom filter of its keys. Point
//! queries probe only filters whose range contains the key, then verify
//! candidates by binary search in the (sorted) block.
//!
//! Every node is its own store file, serialized to bytes and packed into
//! little-endian `u64` words, so query I/O is charged through the store like
//! data I/O. A node larger than one block costs one read per block.

use std::f64::consts::LN_2;

use crate::bloom::{BloomFilter, DEFAULT_FPP};
use crate::easort::ApproxRun;
use crate::error::{Error, Result};
use crate::io_sim::{BlockStore, FileId, IoStats, Workspace};

const NODE_INTERNAL: u8 = 1;
const NODE_LEAF: u8 = 2;
const NO_REF: u64 = u64::MAX;

/// Inputs to the analytical cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub keysize: usize,
    pub ptrsize: usize,
    pub fpp: f64,
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub p: usize,
    pub k: usize,
    /// Actual bucket count; `p^k` when unknown.
    pub buckets: Option<usize>,
}

impl CostParams {
    pub fn new(n: usize, m: usize, b: usize, k: usize) -> Result<Self> {
        let p = crate::easort::compute_bucket_count(m, b)?;
        Ok(Self {
            keysize: 8,
            ptrsize: 8,
            fpp: DEFAULT_FPP,
            n,
            m,
            b,
            p,
            k,
            buckets: None,
        })
    }

    pub fn for_run(run: &ApproxRun) -> Result<Self> {
        let mut cp = Self::new(run.params.n(), run.params.m(), run.params.b(), run.passes_used.max(1))?;
        cp.buckets = Some(run.buckets.len());
        Ok(cp)
    }

    pub fn with_fpp(mut self, fpp: f64) -> Self {
        self.fpp = fpp;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.keysize == 0 || self.ptrsize == 0 {
            return Err(Error::InvalidParams("keysize and ptrsize must be >= 1".into()));
        }
        if !(self.fpp > 0.0 && self.fpp < 1.0) {
            return Err(Error::OutOfRange(format!("fpp {} not in (0, 1)", self.fpp)));
        }
        Ok(())
    }

    fn model_buckets(&self) -> f64 {
        (self.p as f64).powi(self.k as i32)
    }

    /// `floor(b * keysize / (ptrsize + keysize))`.
    pub fn fanout(&self) -> usize {
        self.b * self.keysize / (self.ptrsize + self.keysize)
    }

    /// `floor((b * keysize - 8 - ptrsize) / (2 keysize - b ln(fpp) / ln^2 2))`,
    /// or `None` if the numerator is not positive.
    pub fn bfs_per_block(&self) -> Option<usize> {
        let num = (self.b * self.keysize) as f64 - 8.0 - self.ptrsize as f64;
        if num <= 0.0 {
            return None;
        }
        let den = 2.0 * self.keysize as f64 - self.b as f64 * self.fpp.ln() / (LN_2 * LN_2);
        Some((num / den).floor() as usize)
    }
}

/// Predicted costs, in block I/Os.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub fanout: usize,
    pub vbf_height: usize,
    pub bfs_per_block: usize,
    pub leaves_io: f64,
    pub fpp: f64,
}

impl CostModel {
    pub fn data_io(&self, matched_bfs: f64) -> f64 {
        matched_bfs * self.fpp
    }

    pub fn single_query(&self, matched_bfs: f64) -> f64 {
        self.vbf_height as f64 + self.leaves_io + self.data_io(matched_bfs)
    }

    pub fn range_query(&self, overlapped_buckets: usize, matched_bfs: f64) -> f64 {
        2.0 * self.vbf_height as f64 + overlapped_buckets as f64 * self.leaves_io + matched_bfs
    }
}

/// Smallest `h` with `base^h >= x`.
fn ceil_log(base: usize, x: usize) -> usize {
    let (mut h, mut reach) = (0, 1usize);
    while reach < x {
        reach = reach.saturating_mul(base);
        h += 1;
    }
    h
}

pub fn cost_model(cp: &CostParams) -> Result<CostModel> {
    cp.validate()?;
    let fanout = cp.fanout();
    if fanout < 2 {
        return Err(Error::CostModelDegenerate(format!("fanout = {fanout}")));
    }
    let bfs = cp.bfs_per_block().unwrap_or(0);
    if bfs == 0 {
        return Err(Error::CostModelDegenerate(format!(
            "BFsPerBlock < 1 (b = {}, keysize = {}, ptrsize = {}, fpp = {})",
            cp.b, cp.keysize, cp.ptrsize, cp.fpp
        )));
    }
    let buckets = cp.buckets.unwrap_or(cp.model_buckets() as usize).max(1);
    Ok(CostModel {
        fanout,
        vbf_height: ceil_log(fanout, buckets) + 1,
        bfs_per_block: bfs,
        leaves_io: cp.n as f64 / (cp.b as f64 * cp.model_buckets() * bfs as f64),
        fpp: cp.fpp,
    })
}

/// A data block address: file and block index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockRef {
    pub file: FileId,
    pub index: usize,
}

impl BlockRef {
    fn pack(self) -> u64 {
        (self.file.0 << 32) | self.index as u64
    }

    fn unpack(v: u64) -> Self {
        Self {
            file: FileId(v >> 32),
            index: (v & 0xffff_ffff) as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafEntry {
    pub block: BlockRef,
    pub min_key: u64,
    pub max_key: u64,
    pub filter: BloomFilter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafNode {
    pub bucket: u32,
    pub last_in_bucket: bool,
    pub next: Option<FileId>,
    pub entries: Vec<LeafEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalNode {
    pub children: Vec<FileId>,
    /// Upper key bound of every child but the last.
    pub separators: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Internal(InternalNode),
    Leaf(LeafNode),
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        let out = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::CorruptImage("index node truncated".into()))?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

impl Node {
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            Node::Internal(node) => {
                out.push(NODE_INTERNAL);
                out.extend_from_slice(&(node.children.len() as u32).to_le_bytes());
                for c in &node.children {
                    out.extend_from_slice(&c.0.to_le_bytes());
                }
                for s in &node.separators {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            }
            Node::Leaf(leaf) => {
                out.push(NODE_LEAF);
                out.extend_from_slice(&(leaf.entries.len() as u32).to_le_bytes());
                out.extend_from_slice(&leaf.bucket.to_le_bytes());
                out.push(leaf.last_in_bucket as u8);
                out.extend_from_slice(&leaf.next.map_or(NO_REF, |f| f.0).to_le_bytes());
                for e in &leaf.entries {
                    out.extend_from_slice(&e.block.pack().to_le_bytes());
                    out.extend_from_slice(&e.min_key.to_le_bytes());
                    out.extend_from_slice(&e.max_key.to_le_bytes());
                    e.filter.write_bytes(&mut out);
                }
            }
        }
        out
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let kind = r.u8()?;
        let count = r.u32()? as usize;
        match kind {
            NODE_INTERNAL => {
                if count == 0 {
                    return Err(Error::CorruptImage("internal node without children".into()));
                }
                let children = (0..count).map(|_| r.u64().map(FileId)).collect::<Result<_>>()?;
                let separators = (0..count - 1).map(|_| r.u64()).collect::<Result<_>>()?;
                Ok(Node::Internal(InternalNode { children, separators }))
            }
            NODE_LEAF => {
                let bucket = r.u32()?;
                let last_in_bucket = r.u8()? != 0;
                let next = match r.u64()? {
                    NO_REF => None,
                    f => Some(FileId(f)),
                };
                let mut entries = Vec::with_capacity(count);
                for _ in 0..count {
                    let block = BlockRef::unpack(r.u64()?);
                    let min_key = r.u64()?;
                    let max_key = r.u64()?;
                    let (filter, used) = BloomFilter::from_bytes(&r.buf[r.pos..])?;
                    r.pos += used;
                    entries.push(LeafEntry {
                        block,
                        min_key,
                        max_key,
                        filter,
                    });
                }
                Ok(Node::Leaf(LeafNode {
                    bucket,
                    last_in_bucket,
                    next,
                    entries,
                }))
            }
            other => Err(Error::CorruptImage(format!("unknown node type {other}"))),
        }
    }
}

fn bytes_to_words(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect()
}

fn words_to_bytes(words: &[u64]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

fn write_node(store: &mut BlockStore, file: FileId, node: &Node, ws: &mut Workspace) -> Result<()> {
    let words = bytes_to_words(&node.encode());
    for chunk in words.chunks(store.b()) {
        ws.acquire(chunk.len())?;
        store.write_block(file, chunk, ws)?;
    }
    Ok(())
}

/// Reads a node block by block, charging one read per block.
fn read_node(store: &mut BlockStore, file: FileId) -> Result<(Node, u64)> {
    let mut ws = store.workspace();
    let blocks = store.block_count(file)?;
    let mut words = Vec::new();
    for i in 0..blocks {
        let block = store.read_block(file, i, &mut ws)?;
        ws.release(block.len())?;
        words.extend(block);
    }
    Ok((Node::decode(&words_to_bytes(&words))?, blocks as u64))
}

fn read_node_unmetered(store: &BlockStore, file: FileId) -> Result<Node> {
    Node::decode(&words_to_bytes(&store.contents_unmetered(file)?))
}

/// Per-query I/O and probe counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub internal_reads: u64,
    pub leaf_reads: u64,
    pub matched_bfs: u64,
    pub data_reads: u64,
    pub false_positives: u64,
}

impl QueryStats {
    pub fn total_io(&self) -> u64 {
        self.internal_reads + self.leaf_reads + self.data_reads
    }
}

impl std::ops::AddAssign for QueryStats {
    fn add_assign(&mut self, o: Self) {
        self.internal_reads += o.internal_reads;
        self.leaf_reads += o.leaf_reads;
        self.matched_bfs += o.matched_bfs;
        self.data_reads += o.data_reads;
        self.false_positives += o.false_positives;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointQueryResult {
    pub hits: Vec<BlockRef>,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeQueryResult {
    pub keys: Vec<u64>,
    pub overlapped_buckets: usize,
    pub stats: QueryStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VbfTree {
    root: FileId,
    internal_levels: usize,
    fanout: usize,
    leaf_capacity: usize,
    fpp: f64,
    bucket_first_leaf: Vec<FileId>,
    leaf_count: usize,
    node_files: Vec<FileId>,
    build_io: IoStats,
}

impl VbfTree {
    /// Bulk-loads the index. Each data block is read once; node writes are
    /// charged to the store and reported by [`VbfTree::build_io`].
    pub fn bulk_build(run: &ApproxRun, store: &mut BlockStore, cp: &CostParams) -> Result<Self> {
        cp.validate()?;
        if run.buckets.is_empty() {
            return Err(Error::EmptySequence);
        }
        let before = store.stats();
        let b = store.b();
        let fanout = cp.fanout().max(2);
        let leaf_capacity = cp.bfs_per_block().unwrap_or(0).max(1);
        let mut ws = store.workspace();
        let mut node_files = Vec::new();

        let mut chains: Vec<Vec<LeafEntry>> = Vec::with_capacity(run.buckets.len());
        for bk in &run.buckets {
            if bk.file.0 >= 1 << 32 {
                return Err(Error::OutOfRange(format!("file id {} too large for a block reference", bk.file)));
            }
            let mut entries = Vec::new();
            for index in 0..store.block_count(bk.file)? {
                let block = store.read_block(bk.file, index, &mut ws)?;
                let mut filter = BloomFilter::with_capacity(b, cp.fpp)?;
                for &k in &block {
                    filter.insert(k);
                }
                entries.push(LeafEntry {
                    block: BlockRef { file: bk.file, index },
                    min_key: *block.iter().min().expect("blocks are non-empty"),
                    max_key: *block.iter().max().expect("blocks are non-empty"),
                    filter,
                });
                ws.release(block.len())?;
            }
            chains.push(entries);
        }

        // allocate leaf files first so each leaf can point at its successor
        let leaf_files: Vec<Vec<FileId>> = chains
            .iter()
            .map(|c| (0..c.len().div_ceil(leaf_capacity).max(1)).map(|_| store.create_file()).collect())
            .collect();
        let flat: Vec<FileId> = leaf_files.iter().flatten().copied().collect();
        let mut cursor = 0;
        for (bucket, (entries, files)) in chains.into_iter().zip(&leaf_files).enumerate() {
            let mut groups: Vec<Vec<LeafEntry>> = Vec::new();
            let mut it = entries.into_iter().peekable();
            while it.peek().is_some() {
                groups.push(it.by_ref().take(leaf_capacity).collect());
            }
            groups.resize_with(files.len(), Vec::new);
            for (i, (group, &file)) in groups.into_iter().zip(files).enumerate() {
                let leaf = Node::Leaf(LeafNode {
                    bucket: bucket as u32,
                    last_in_bucket: i + 1 == files.len(),
                    next: flat.get(cursor + 1).copied(),
                    entries: group,
                });
                write_node(store, file, &leaf, &mut ws)?;
                cursor += 1;
            }
        }
        node_files.extend(&flat);

        let bucket_first_leaf: Vec<FileId> = leaf_files.iter().map(|f| f[0]).collect();
        let mut level: Vec<(FileId, Option<u64>)> = bucket_first_leaf
            .iter()
            .zip(&run.buckets)
            .map(|(&f, bk)| (f, bk.upper))
            .collect();
        let mut internal_levels = 0;
        loop {
            let mut next_level = Vec::with_capacity(level.len().div_ceil(fanout));
            for group in level.chunks(fanout) {
                let children: Vec<FileId> = group.iter().map(|g| g.0).collect();
                let separators = group[..group.len() - 1]
                    .iter()
                    .map(|g| g.1.ok_or_else(|| Error::InvalidParams("unbounded bucket before the last".into())))
                    .collect::<Result<Vec<u64>>>()?;
                let file = store.create_file();
                write_node(store, file, &Node::Internal(InternalNode { children, separators }), &mut ws)?;
                node_files.push(file);
                next_level.push((file, group.last().unwrap().1));
            }
            internal_levels += 1;
            level = next_level;
            if level.len() == 1 {
                break;
            }
        }

        Ok(Self {
            root: level[0].0,
            internal_levels,
            fanout,
            leaf_capacity,
            fpp: cp.fpp,
            bucket_first_leaf,
            leaf_count: flat.len(),
            node_files,
            build_io: store.stats().since(&before),
        })
    }

    /// Internal levels above the leaves.
    pub fn internal_levels(&self) -> usize {
        self.internal_levels
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn fpp(&self) -> f64 {
        self.fpp
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_first_leaf.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// Store files holding index nodes.
    pub fn node_files(&self) -> &[FileId] {
        &self.node_files
    }

    /// I/O spent by [`VbfTree::bulk_build`], data reads and node writes.
    pub fn build_io(&self) -> IoStats {
        self.build_io
    }

    /// Returns the first leaf of the bucket routing `key`, charging one read
    /// per internal-node block.
    fn descend(&self, store: &mut BlockStore, key: u64, stats: &mut QueryStats) -> Result<FileId> {
        let mut file = self.root;
        for _ in 0..self.internal_levels {
            let (node, reads) = read_node(store, file)?;
            stats.internal_reads += reads;
            let Node::Internal(node) = node else {
                return Err(Error::CorruptImage("expected an internal node".into()));
            };
            let slot = node.separators.partition_point(|&s| s < key);
            file = node.children[slot];
        }
        Ok(file)
    }

    fn read_leaf(store: &mut BlockStore, file: FileId, stats: &mut QueryStats) -> Result<LeafNode> {
        let (node, reads) = read_node(store, file)?;
        stats.leaf_reads += reads;
        match node {
            Node::Leaf(leaf) => Ok(leaf),
            Node::Internal(_) => Err(Error::CorruptImage("expected a leaf node".into())),
        }
    }

    fn read_data(store: &mut BlockStore, at: BlockRef, stats: &mut QueryStats) -> Result<Vec<u64>> {
        let mut ws = store.workspace();
        let block = store.read_block(at.file, at.index, &mut ws)?;
        ws.release(block.len())?;
        stats.data_reads += 1;
        Ok(block)
    }

    pub fn point_query(&self, store: &mut BlockStore, key: u64) -> Result<PointQueryResult> {
        let mut stats = QueryStats::default();
        let mut hits = Vec::new();
        let mut file = self.descend(store, key, &mut stats)?;
        loop {
            let leaf = Self::read_leaf(store, file, &mut stats)?;
            for e in &leaf.entries {
                if key < e.min_key || key > e.max_key {
                    continue;
                }
                stats.matched_bfs += 1;
                if !e.filter.contains(key) {
                    continue;
                }
                let block = Self::read_data(store, e.block, &mut stats)?;
                if block.binary_search(&key).is_ok() {
                    hits.push(e.block);
                } else {
                    stats.false_positives += 1;
                }
            }
            match (leaf.last_in_bucket, leaf.next) {
                (false, Some(next)) => file = next,
                _ => break,
            }
        }
        Ok(PointQueryResult { hits, stats })
    }

    /// All keys in `[lo, hi]`, in index order.
    pub fn range_query(&self, store: &mut BlockStore, lo: u64, hi: u64) -> Result<RangeQueryResult> {
        if lo > hi {
            return Err(Error::InvalidParams(format!("range lo = {lo} > hi = {hi}")));
        }
        let mut stats = QueryStats::default();
        let start = self.descend(store, lo, &mut stats)?;
        let stop = self.descend(store, hi, &mut stats)?;
        let mut keys = Vec::new();
        let mut file = start;
        let mut overlapped_buckets = 1;
        let mut in_last_bucket = start == stop;
        loop {
            let leaf = Self::read_leaf(store, file, &mut stats)?;
            for e in &leaf.entries {
                if e.max_key < lo || e.min_key > hi {
                    continue;
                }
                stats.matched_bfs += 1;
                let block = Self::read_data(store, e.block, &mut stats)?;
                keys.extend(block.into_iter().filter(|k| (lo..=hi).contains(k)));
            }
            let Some(next) = leaf.next else { break };
            if leaf.last_in_bucket {
                if in_last_bucket {
                    break;
                }
                overlapped_buckets += 1;
                in_last_bucket = next == stop;
            }
            file = next;
        }
        Ok(RangeQueryResult {
            keys,
            overlapped_buckets,
            stats,
        })
    }

    /// All leaves in chain order, read without charging I/O.
    pub fn leaves_unmetered(&self, store: &BlockStore) -> Result<Vec<LeafNode>> {
        let mut out = Vec::with_capacity(self.leaf_count);
        let mut file = Some(self.bucket_first_leaf[0]);
        while let Some(f) = file {
            match read_node_unmetered(store, f)? {
                Node::Leaf(leaf) => {
                    file = leaf.next;
                    out.push(leaf);
                }
                Node::Internal(_) => return Err(Error::CorruptImage("expected a leaf node".into())),
            }
        }
        Ok(out)
    }

    /// Root node, read without charging I/O.
    pub fn root_unmetered(&self, store: &BlockStore) -> Result<InternalNode> {
        match read_node_unmetered(store, self.root)? {
            Node::Internal(node) => Ok(node),
            Node::Leaf(_) => Err(Error::CorruptImage("root is a leaf".into())),
        }
    }
}
