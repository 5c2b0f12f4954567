//! Simulated external memory.
//!
//! A [`BlockStore`] holds files made of blocks of at most `b` keys and
//! charges one I/O per block transfer. A [`Workspace`] models internal
//! memory: reading a block makes its items resident, writing a block
//! evicts them, and exceeding the `m`-item budget is an error.
//!
//! Creating and deleting files is metadata only and costs nothing. The
//! `*_unmetered` accessors exist for input staging and for measurement
//! code that must not perturb the I/O count.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// External-memory parameters: `n` items in total, `m` items of internal
/// memory, `b` items per block. Requires `1 < b < m/2` and `m < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IoParams {
    n: usize,
    m: usize,
    b: usize,
}

impl IoParams {
    pub fn new(n: usize, m: usize, b: usize) -> Result<Self> {
        if b <= 1 {
            return Err(Error::InvalidParams(format!("1 < b violated (b = {b})")));
        }
        if 2 * b >= m {
            return Err(Error::InvalidParams(format!(
                "b < m/2 violated (b = {b}, m = {m})"
            )));
        }
        if m >= n {
            return Err(Error::InvalidParams(format!(
                "m < n violated (m = {m}, n = {n})"
            )));
        }
        Ok(Self { n, m, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of blocks needed for `items` items.
    pub fn blocks_for(&self, items: usize) -> usize {
        items.div_ceil(self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FileId(pub u64);

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Block transfer counters. `t = reads + writes`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoStats {
    pub reads: u64,
    pub writes: u64,
}

impl IoStats {
    pub fn t(&self) -> u64 {
        self.reads + self.writes
    }

    /// Counters accumulated since `earlier` was taken.
    pub fn since(&self, earlier: &IoStats) -> IoStats {
        IoStats {
            reads: self.reads - earlier.reads,
            writes: self.writes - earlier.writes,
        }
    }
}

impl std::ops::Add for IoStats {
    type Output = IoStats;

    fn add(self, rhs: IoStats) -> IoStats {
        IoStats {
            reads: self.reads + rhs.reads,
            writes: self.writes + rhs.writes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IoKind {
    Read,
    Write,
}

/// One recorded block transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IoEvent {
    pub kind: IoKind,
    pub file: FileId,
    pub index: usize,
}

/// Internal memory with a hard capacity of `m` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    capacity: usize,
    resident: usize,
    peak: usize,
}

impl Workspace {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            resident: 0,
            peak: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn resident(&self) -> usize {
        self.resident
    }

    pub fn free(&self) -> usize {
        self.capacity - self.resident
    }

    /// Highest residency observed so far.
    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn acquire(&mut self, items: usize) -> Result<()> {
        if items > self.free() {
            return Err(Error::MemoryBudgetExceeded {
                requested: items,
                resident: self.resident,
                capacity: self.capacity,
            });
        }
        self.resident += items;
        self.peak = self.peak.max(self.resident);
        Ok(())
    }

    pub fn release(&mut self, items: usize) -> Result<()> {
        if items > self.resident {
            return Err(Error::WorkspaceUnderflow {
                requested: items,
                resident: self.resident,
            });
        }
        self.resident -= items;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct StoredFile {
    blocks: Vec<Vec<u64>>,
}

impl StoredFile {
    fn items(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// A block device holding files of `u64` keys.
#[derive(Debug, Clone)]
pub struct BlockStore {
    params: IoParams,
    files: BTreeMap<FileId, StoredFile>,
    next_id: u64,
    stats: IoStats,
    trace: Option<Vec<IoEvent>>,
}

impl BlockStore {
    pub fn new(params: IoParams) -> Self {
        Self {
            params,
            files: BTreeMap::new(),
            next_id: 0,
            stats: IoStats::default(),
            trace: None,
        }
    }

    pub fn params(&self) -> IoParams {
        self.params
    }

    pub fn b(&self) -> usize {
        self.params.b
    }

    /// A workspace sized to this store's memory budget.
    pub fn workspace(&self) -> Workspace {
        Workspace::new(self.params.m)
    }

    pub fn stats(&self) -> IoStats {
        self.stats
    }

    /// Starts recording every block transfer.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[IoEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn create_file(&mut self) -> FileId {
        let id = FileId(self.next_id);
        self.next_id += 1;
        self.files.insert(id, StoredFile::default());
        id
    }

    pub fn contains(&self, file: FileId) -> bool {
        self.files.contains_key(&file)
    }

    pub fn file_ids(&self) -> impl Iterator<Item = FileId> + '_ {
        self.files.keys().copied()
    }

    fn file(&self, file: FileId) -> Result<&StoredFile> {
        self.files.get(&file).ok_or(Error::UnknownFile(file))
    }

    pub fn block_count(&self, file: FileId) -> Result<usize> {
        Ok(self.file(file)?.blocks.len())
    }

    pub fn item_count(&self, file: FileId) -> Result<usize> {
        Ok(self.file(file)?.items())
    }

    /// Size of one block without transferring it.
    pub fn block_len(&self, file: FileId, index: usize) -> Result<usize> {
        let f = self.file(file)?;
        f.blocks
            .get(index)
            .map(Vec::len)
            .ok_or(Error::BlockOutOfRange {
                file,
                index,
                len: f.blocks.len(),
            })
    }

    /// Transfers one block into `ws`. Costs one read.
    pub fn read_block(&mut self, file: FileId, index: usize, ws: &mut Workspace) -> Result<Vec<u64>> {
        let len = self.block_len(file, index)?;
        ws.acquire(len)?;
        self.stats.reads += 1;
        if let Some(trace) = &mut self.trace {
            trace.push(IoEvent {
                kind: IoKind::Read,
                file,
                index,
            });
        }
        Ok(self.files[&file].blocks[index].clone())
    }

    /// Appends `keys` as a new block of `file`, evicting them from `ws`.
    /// Costs one write. Returns the new block's index.
    pub fn write_block(&mut self, file: FileId, keys: &[u64], ws: &mut Workspace) -> Result<usize> {
        let b = self.params.b;
        if keys.is_empty() {
            return Err(Error::EmptyBlock);
        }
        if keys.len() > b {
            return Err(Error::BlockTooLarge { len: keys.len(), b });
        }
        let f = self.files.get(&file).ok_or(Error::UnknownFile(file))?;
        if f.blocks.last().is_some_and(|last| last.len() < b) {
            return Err(Error::PartialBlockNotFinal(file));
        }
        ws.release(keys.len())?;
        let f = self.files.get_mut(&file).expect("checked above");
        f.blocks.push(keys.to_vec());
        let index = f.blocks.len() - 1;
        self.stats.writes += 1;
        if let Some(trace) = &mut self.trace {
            trace.push(IoEvent {
                kind: IoKind::Write,
                file,
                index,
            });
        }
        Ok(index)
    }

    pub fn delete_file(&mut self, file: FileId) -> Result<()> {
        self.files.remove(&file).map(|_| ()).ok_or(Error::UnknownFile(file))
    }

    /// Stages `keys` as a new file without charging I/O.
    pub fn load_unmetered(&mut self, keys: &[u64]) -> FileId {
        let id = self.create_file();
        let blocks = keys.chunks(self.params.b).map(<[u64]>::to_vec).collect();
        self.files.get_mut(&id).expect("just created").blocks = blocks;
        id
    }

    /// Every key of `file` in block order, without charging I/O.
    pub fn contents_unmetered(&self, file: FileId) -> Result<Vec<u64>> {
        Ok(self.file(file)?.blocks.concat())
    }

    pub fn blocks_unmetered(&self, file: FileId) -> Result<&[Vec<u64>]> {
        Ok(&self.file(file)?.blocks)
    }

    pub fn image(&self) -> StoreImage {
        StoreImage {
            n: self.params.n as u64,
            m: self.params.m as u64,
            b: self.params.b as u64,
            files: self
                .files
                .iter()
                .map(|(id, f)| (*id, f.blocks.clone()))
                .collect(),
        }
    }

    /// Rebuilds a store from a persisted image. I/O counters start at zero.
    pub fn from_image(image: StoreImage) -> Result<Self> {
        let params = IoParams::new(image.n as usize, image.m as usize, image.b as usize)?;
        let mut store = BlockStore::new(params);
        for (id, blocks) in image.files {
            if blocks.iter().any(|blk| blk.is_empty() || blk.len() > params.b) {
                return Err(Error::CorruptImage(format!("file {id} has a malformed block")));
            }
            store.next_id = store.next_id.max(id.0 + 1);
            store.files.insert(id, StoredFile { blocks });
        }
        Ok(store)
    }
}

const MAGIC: &[u8; 4] = b"EASK";
const VERSION: u32 = 1;

/// The persisted form of a store: header parameters plus every file's blocks.
///
/// Layout (little-endian): magic `EASK`, `u32` version, `u64` n, `u64` m,
/// `u64` b, then until end of input one record per file: `u64` file id,
/// `u64` block count, and per block a `u32` key count followed by the keys
/// as `u64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreImage {
    pub n: u64,
    pub m: u64,
    pub b: u64,
    pub files: Vec<(FileId, Vec<Vec<u64>>)>,
}

impl StoreImage {
    /// A single-file image of `keys` chunked into blocks of `b`.
    pub fn single_file(keys: &[u64], m: u64, b: u64) -> Self {
        let width = b.max(1) as usize;
        StoreImage {
            n: keys.len() as u64,
            m,
            b,
            files: vec![(FileId(0), keys.chunks(width).map(<[u64]>::to_vec).collect())],
        }
    }

    /// All keys of all files, in file then block order.
    pub fn all_keys(&self) -> Vec<u64> {
        self.files.iter().flat_map(|(_, blocks)| blocks.concat()).collect()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [self.n, self.m, self.b] {
            w.write_all(&v.to_le_bytes())?;
        }
        for (id, blocks) in &self.files {
            w.write_all(&id.0.to_le_bytes())?;
            w.write_all(&(blocks.len() as u64).to_le_bytes())?;
            for block in blocks {
                w.write_all(&(block.len() as u32).to_le_bytes())?;
                for key in block {
                    w.write_all(&key.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::CorruptImage("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::CorruptImage(format!("unsupported version {version}")));
        }
        let (n, m, b) = (cur.u64()?, cur.u64()?, cur.u64()?);
        let mut files = Vec::new();
        while !cur.at_end() {
            let id = FileId(cur.u64()?);
            let count = cur.u64()? as usize;
            let mut blocks = Vec::with_capacity(count.min(1 << 20));
            for _ in 0..count {
                let len = cur.u32()? as usize;
                let block = (0..len).map(|_| cur.u64()).collect::<Result<Vec<_>>>()?;
                blocks.push(block);
            }
            files.push((id, blocks));
        }
        Ok(StoreImage { n, m, b, files })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn at_end(&self) -> bool {
        self.pos == self.bytes.len()
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(Error::CorruptImage("unexpected end of input".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
