//! Sort-merge equijoins over approximately sorted relations.
//!
//! A tuple is a `u64` packing a 32-bit join key above a 32-bit tuple id, so
//! sorting tuples sorts by key. Approximately sorted relations (ASR) are
//! [`ApproxRun`]s built with [`crate::easort::easort_by`] over
//! [`tuple_key`], so bucket ranges are key ranges and equal keys never span
//! buckets. Sorted relations (SR) are a list of files whose concatenation is
//! nondecreasing by key.
//!
//! Output pairs `(left id, right id)` are written to an output file in
//! blocks as they are produced and also returned in memory.

use std::fmt;
use std::str::FromStr;

use crate::easort::{easort_by, ApproxRun, BucketDescriptor, EasortConfig};
use crate::error::{Error, Result};
use crate::io_sim::{BlockStore, FileId, IoParams, IoStats, Workspace};

pub fn pack_tuple(key: u32, id: u32) -> u64 {
    (u64::from(key) << 32) | u64::from(id)
}

pub fn tuple_key(t: u64) -> u64 {
    t >> 32
}

pub fn tuple_id(t: u64) -> u32 {
    t as u32
}

/// Whether a bucket fits in memory with two blocks to spare:
/// `ceil(count / b) <= m/b - 2`.
pub fn is_m_tolerable(bucket: &BucketDescriptor, m: usize, b: usize) -> bool {
    (bucket.count.div_ceil(b) + 2) * b <= m
}

/// How non-tolerable buckets are joined against a sorted relation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum JoinStrategy {
    /// Load SR slices and spill unresolved ASR tuples to a shrinking temp file.
    #[default]
    TempFile,
    /// Sort the bucket in memory-sized batches and re-scan SR for each batch.
    Rescan,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseCounts {
    /// Buckets loaded whole and merged.
    pub tolerable: usize,
    /// Buckets whose SR slice fit in memory.
    pub slice_in_memory: usize,
    /// Buckets resolved through temp files.
    pub temp_file: usize,
    /// Buckets joined by re-scanning SR.
    pub rescan: usize,
    /// Two-side bucket pairs where neither side was tolerable.
    pub batched: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinResult {
    /// `(left id, right id)` per match, in output order.
    pub pairs: Vec<(u32, u32)>,
    pub output: FileId,
    /// All I/O of the join, temp traffic and output writes included.
    pub io: IoStats,
    /// The temp-file share of `io`.
    pub temp_io: IoStats,
    pub cases: CaseCounts,
    /// Item counts of successive temp files, one list per temp-file bucket.
    pub temp_sizes: Vec<Vec<usize>>,
    /// Bucket file loads and scans (two-side joins).
    pub bucket_scans: usize,
    /// Slices holding a single run of the smallest deferred key, matched
    /// against the temp file without rewriting it.
    pub stalled_slices: usize,
    pub peak_memory: usize,
}

struct Ctx<'s> {
    store: &'s mut BlockStore,
    ws: Workspace,
    b: usize,
    out_file: FileId,
    out_buf: Vec<u64>,
    pairs: Vec<(u32, u32)>,
    temp_io: IoStats,
    before: IoStats,
}

impl<'s> Ctx<'s> {
    fn new(store: &'s mut BlockStore) -> Result<Self> {
        let b = store.b();
        let before = store.stats();
        let mut ws = store.workspace();
        // one block reserved for output
        ws.acquire(b)?;
        let out_file = store.create_file();
        Ok(Self {
            store,
            ws,
            b,
            out_file,
            out_buf: Vec::with_capacity(b),
            pairs: Vec::new(),
            temp_io: IoStats::default(),
            before,
        })
    }

    fn m(&self) -> usize {
        self.ws.capacity()
    }

    fn emit(&mut self, left: u64, right: u64) -> Result<()> {
        let pair = (tuple_id(left), tuple_id(right));
        self.pairs.push(pair);
        self.out_buf.push((u64::from(pair.0) << 32) | u64::from(pair.1));
        if self.out_buf.len() == self.b {
            self.flush_output()?;
        }
        Ok(())
    }

    fn flush_output(&mut self) -> Result<()> {
        if !self.out_buf.is_empty() {
            let len = self.out_buf.len();
            self.store.write_block(self.out_file, &self.out_buf, &mut self.ws)?;
            self.ws.acquire(len)?;
            self.out_buf.clear();
        }
        Ok(())
    }

    fn read(&mut self, file: FileId, index: usize) -> Result<Vec<u64>> {
        self.store.read_block(file, index, &mut self.ws)
    }

    fn release(&mut self, items: usize) -> Result<()> {
        self.ws.release(items)
    }

    fn finish(
        mut self,
        cases: CaseCounts,
        temp_sizes: Vec<Vec<usize>>,
        bucket_scans: usize,
        stalled_slices: usize,
    ) -> Result<JoinResult> {
        self.flush_output()?;
        self.ws.release(self.b)?;
        Ok(JoinResult {
            pairs: self.pairs,
            output: self.out_file,
            io: self.store.stats().since(&self.before),
            temp_io: self.temp_io,
            cases,
            temp_sizes,
            bucket_scans,
            stalled_slices,
            peak_memory: self.ws.peak(),
        })
    }
}

/// Position of a cursor: file, block and offset. Exhausted cursors sit at
/// `(files, 0, 0)`, which orders after every real position.
type CursorPos = (usize, usize, usize);

/// Forward cursor over a sorted relation, holding one block in memory.
struct Cursor {
    files: Vec<(FileId, usize)>,
    file_idx: usize,
    next_block: usize,
    block: Vec<u64>,
    pos: usize,
    last_key: Option<u64>,
    ordinal: usize,
}

struct Chunk {
    tuples: Vec<u64>,
    complete: bool,
    /// Items held for the chunk beyond the cursor's own block.
    held: usize,
}

impl Cursor {
    fn new(store: &BlockStore, files: &[FileId]) -> Result<Self> {
        let files = files
            .iter()
            .map(|&f| Ok((f, store.block_count(f)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            files,
            file_idx: 0,
            next_block: 0,
            block: Vec::new(),
            pos: 0,
            last_key: None,
            ordinal: 0,
        })
    }

    fn has_next_block(&self) -> bool {
        let (mut fi, mut nb) = (self.file_idx, self.next_block);
        while fi < self.files.len() {
            if nb < self.files[fi].1 {
                return true;
            }
            fi += 1;
            nb = 0;
        }
        false
    }

    fn read_next(&mut self, ctx: &mut Ctx) -> Result<Option<Vec<u64>>> {
        while self.file_idx < self.files.len() && self.next_block >= self.files[self.file_idx].1 {
            self.file_idx += 1;
            self.next_block = 0;
        }
        let Some(&(file, _)) = self.files.get(self.file_idx) else {
            return Ok(None);
        };
        let block = ctx.read(file, self.next_block)?;
        self.next_block += 1;
        let mut prev = self.last_key;
        for &t in &block {
            if prev.is_some_and(|p| tuple_key(t) < p) {
                return Err(Error::UnsortedRelation { block: self.ordinal });
            }
            prev = Some(tuple_key(t));
        }
        self.last_key = prev;
        self.ordinal += 1;
        Ok(Some(block))
    }

    /// Makes the current tuple resident; false once exhausted.
    fn fill(&mut self, ctx: &mut Ctx) -> Result<bool> {
        while self.pos >= self.block.len() {
            ctx.release(self.block.len())?;
            self.block.clear();
            self.pos = 0;
            match self.read_next(ctx)? {
                Some(block) => self.block = block,
                None => return Ok(false),
            }
        }
        Ok(true)
    }

    fn peek_key(&mut self, ctx: &mut Ctx) -> Result<Option<u64>> {
        Ok(if self.fill(ctx)? { Some(tuple_key(self.block[self.pos])) } else { None })
    }

    fn current(&self) -> u64 {
        self.block[self.pos]
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn skip_while(&mut self, ctx: &mut Ctx, pred: impl Fn(u64) -> bool) -> Result<Option<u64>> {
        loop {
            match self.peek_key(ctx)? {
                Some(k) if pred(k) => self.advance(),
                other => return Ok(other),
            }
        }
    }

    /// Reads the rest of the relation, so every block is read exactly once.
    fn drain(&mut self, ctx: &mut Ctx) -> Result<()> {
        ctx.release(self.block.len())?;
        self.block.clear();
        self.pos = 0;
        while let Some(block) = self.read_next(ctx)? {
            ctx.release(block.len())?;
        }
        Ok(())
    }

    fn position(&mut self, ctx: &mut Ctx) -> Result<CursorPos> {
        Ok(if self.fill(ctx)? {
            (self.file_idx, self.next_block - 1, self.pos)
        } else {
            (self.files.len(), 0, 0)
        })
    }

    fn seek(&mut self, ctx: &mut Ctx, (fi, bi, pos): CursorPos) -> Result<()> {
        ctx.release(self.block.len())?;
        self.block.clear();
        self.pos = 0;
        self.file_idx = fi;
        self.next_block = bi;
        if fi == self.files.len() {
            return Ok(());
        }
        let block = ctx.read(self.files[fi].0, bi)?;
        self.last_key = block.last().map(|&t| tuple_key(t));
        self.block = block;
        self.next_block = bi + 1;
        self.pos = pos;
        Ok(())
    }

    /// Loads up to `cap_blocks` blocks starting at the current tuple. The
    /// chunk is complete when it reaches past `upper` or the end of the
    /// relation; then the cursor keeps the last block, positioned after
    /// `upper`. Otherwise the cursor moves to the block after the chunk.
    fn load_chunk(&mut self, ctx: &mut Ctx, cap_blocks: usize, upper: Option<u64>) -> Result<Chunk> {
        if !self.fill(ctx)? {
            return Ok(Chunk {
                tuples: Vec::new(),
                complete: true,
                held: 0,
            });
        }
        let mut tuples = self.block[self.pos..].to_vec();
        let mut held = vec![self.block.len()];
        let mut last = std::mem::take(&mut self.block);
        let mut last_start = self.pos;
        let complete = loop {
            if upper.is_some_and(|u| tuple_key(*tuples.last().unwrap()) > u) {
                break true;
            }
            if held.len() >= cap_blocks && self.has_next_block() {
                break false;
            }
            match self.read_next(ctx)? {
                None => break true,
                Some(block) => {
                    held.push(block.len());
                    tuples.extend_from_slice(&block);
                    last = block;
                    last_start = 0;
                }
            }
        };
        if complete {
            let cut = match upper {
                Some(u) => last_start + last[last_start..].partition_point(|&t| tuple_key(t) <= u),
                None => last.len(),
            };
            self.block = last;
            self.pos = cut;
            held.pop();
        } else {
            self.pos = 0;
        }
        Ok(Chunk {
            tuples,
            complete,
            held: held.iter().sum(),
        })
    }
}

fn matches_of(sorted: &[u64], key: u64) -> &[u64] {
    let lo = sorted.partition_point(|&t| tuple_key(t) < key);
    let hi = lo + sorted[lo..].partition_point(|&t| tuple_key(t) == key);
    &sorted[lo..hi]
}

/// Merges an in-memory batch sorted by key against the cursor.
fn merge_batch(ctx: &mut Ctx, cursor: &mut Cursor, batch: &[u64]) -> Result<()> {
    let mut i = 0;
    while i < batch.len() {
        let k = tuple_key(batch[i]);
        let j = i + batch[i..].partition_point(|&t| tuple_key(t) == k);
        loop {
            match cursor.peek_key(ctx)? {
                Some(s) if s < k => cursor.advance(),
                Some(s) if s == k => {
                    let r = cursor.current();
                    for &a in &batch[i..j] {
                        ctx.emit(a, r)?;
                    }
                    cursor.advance();
                }
                _ => break,
            }
        }
        i = j;
    }
    Ok(())
}

fn load_blocks(ctx: &mut Ctx, file: FileId, range: std::ops::Range<usize>) -> Result<Vec<u64>> {
    let mut items = Vec::new();
    for i in range {
        items.extend(ctx.read(file, i)?);
    }
    items.sort_unstable();
    Ok(items)
}

/// Streams a file block by block; `temp` routes the reads to the temp tally.
fn stream(ctx: &mut Ctx, file: FileId, temp: bool, mut f: impl FnMut(&mut Ctx, u64) -> Result<()>) -> Result<()> {
    for i in 0..ctx.store.block_count(file)? {
        let block = ctx.read(file, i)?;
        if temp {
            ctx.temp_io.reads += 1;
        }
        for &t in &block {
            f(ctx, t)?;
        }
        ctx.release(block.len())?;
    }
    Ok(())
}

fn require_join_memory(store: &BlockStore) -> Result<()> {
    let (m, b) = (store.params().m(), store.b());
    if m < 4 * b {
        return Err(Error::InvalidParams(format!("joins need m >= 4b (m = {m}, b = {b})")));
    }
    Ok(())
}

fn total_items(store: &BlockStore, files: &[FileId]) -> Result<usize> {
    files.iter().map(|&f| store.item_count(f)).sum()
}

/// Approximately sorts `tuples` by key with `k` passes in a scratch store
/// of the same `m` and `b`, then copies the bucket files into `store`.
/// Relations of at most `m` tuples are sorted in one memory load. Returns the run and the I/O the sort performed.
pub fn approx_sort_relation(store: &mut BlockStore, tuples: &[u64], k: usize, seed: u64) -> Result<(ApproxRun, IoStats)> {
    let params = store.params();
    if tuples.len() <= params.m() {
        // one memory load: read, sort, write back
        let mut sorted = tuples.to_vec();
        sorted.sort_unstable();
        let file = store.load_unmetered(&sorted);
        let blocks = params.blocks_for(sorted.len()) as u64;
        let buckets = if sorted.is_empty() {
            store.delete_file(file)?;
            Vec::new()
        } else {
            vec![BucketDescriptor {
                file,
                lower: None,
                upper: None,
                count: sorted.len(),
                fully_sorted: true,
            }]
        };
        let io = IoStats {
            reads: blocks,
            writes: blocks,
        };
        return Ok((
            ApproxRun {
                buckets,
                params,
                passes_used: 0,
            },
            io,
        ));
    }
    let mut scratch = BlockStore::new(IoParams::new(tuples.len(), params.m(), params.b())?);
    let input = scratch.load_unmetered(tuples);
    let run = easort_by(&mut scratch, input, &EasortConfig::new(k, seed)?, tuple_key)?;
    let io = scratch.stats();
    let mut buckets = run.buckets;
    for bk in &mut buckets {
        bk.file = store.load_unmetered(&scratch.contents_unmetered(bk.file)?);
    }
    Ok((
        ApproxRun {
            buckets,
            params,
            passes_used: run.passes_used,
        },
        io,
    ))
}

/// Joins an approximately sorted relation (left) with a sorted relation
/// (right). Both inputs are read in full; SR is read strictly forward
/// unless `strategy` is [`JoinStrategy::Rescan`].
pub fn join_asr_sr(store: &mut BlockStore, asr: &ApproxRun, sr: &[FileId], strategy: JoinStrategy) -> Result<JoinResult> {
    require_join_memory(store)?;
    let empty = asr.is_empty() || total_items(store, sr)? == 0;
    let mut ctx = Ctx::new(store)?;
    let mut cases = CaseCounts::default();
    let mut temp_sizes = Vec::new();
    let mut stalled = 0;
    if empty {
        return ctx.finish(cases, temp_sizes, 0, 0);
    }
    let (m, b) = (ctx.m(), ctx.b);
    let mut cursor = Cursor::new(ctx.store, sr)?;
    for bk in &asr.buckets {
        if bk.count == 0 {
            continue;
        }
        cursor.skip_while(&mut ctx, |k| bk.lower.is_some_and(|l| k <= l))?;
        let nblocks = ctx.store.block_count(bk.file)?;
        if is_m_tolerable(bk, m, b) {
            cases.tolerable += 1;
            let items = load_blocks(&mut ctx, bk.file, 0..nblocks)?;
            merge_batch(&mut ctx, &mut cursor, &items)?;
            ctx.release(items.len())?;
            continue;
        }
        match strategy {
            JoinStrategy::TempFile => {
                let res = join_bucket_by_slices(&mut ctx, &mut cursor, bk)?;
                stalled += res.stalled;
                if res.sizes.is_empty() {
                    cases.slice_in_memory += 1;
                } else {
                    cases.temp_file += 1;
                    temp_sizes.push(res.sizes);
                }
            }
            JoinStrategy::Rescan => {
                cases.rescan += 1;
                let batch_blocks = (m - 2 * b) / b;
                let start = cursor.position(&mut ctx)?;
                let mut furthest = start;
                for (n, first) in (0..nblocks).step_by(batch_blocks).enumerate() {
                    if n > 0 {
                        cursor.seek(&mut ctx, start)?;
                    }
                    let items = load_blocks(&mut ctx, bk.file, first..(first + batch_blocks).min(nblocks))?;
                    merge_batch(&mut ctx, &mut cursor, &items)?;
                    ctx.release(items.len())?;
                    furthest = furthest.max(cursor.position(&mut ctx)?);
                }
                if cursor.position(&mut ctx)? != furthest {
                    cursor.seek(&mut ctx, furthest)?;
                }
            }
        }
    }
    cursor.drain(&mut ctx)?;
    ctx.finish(cases, temp_sizes, 0, stalled)
}

/// Temp-file traffic of one oversized bucket.
#[derive(Default)]
struct SliceOutcome {
    sizes: Vec<usize>,
    stalled: usize,
}

/// Joins a non-tolerable bucket against SR slices. Unresolved bucket tuples
/// go to a temp file, which is rewritten only when the slice resolves some
/// of them.
fn join_bucket_by_slices(ctx: &mut Ctx, cursor: &mut Cursor, bk: &BucketDescriptor) -> Result<SliceOutcome> {
    let b = ctx.b;
    // input block, output block and temp buffer stay reserved beside the slice
    let cap_blocks = (ctx.m() - 3 * b) / b;
    ctx.ws.acquire(b)?;
    let mut out = SliceOutcome::default();
    let mut source = bk.file;
    let mut upper = bk.upper;
    // key range of the current temp file
    let mut deferred: Option<(u64, u64)> = None;
    loop {
        let is_temp = source != bk.file;
        if let Some((dmin, dmax)) = deferred {
            match cursor.skip_while(ctx, |k| k < dmin)? {
                Some(k) if k <= dmax => upper = Some(dmax),
                _ => {
                    ctx.store.delete_file(source)?;
                    break;
                }
            }
        }
        let chunk = cursor.load_chunk(ctx, cap_blocks, upper)?;
        if chunk.complete {
            stream(ctx, source, is_temp, |ctx, t| {
                for &r in matches_of(&chunk.tuples, tuple_key(t)) {
                    ctx.emit(t, r)?;
                }
                Ok(())
            })?;
            ctx.release(chunk.held)?;
            if is_temp {
                ctx.store.delete_file(source)?;
            }
            break;
        }
        let kmid = tuple_key(*chunk.tuples.last().unwrap());
        if deferred.is_some_and(|(dmin, _)| kmid <= dmin) {
            // the slice is one run of the smallest deferred key: nothing
            // resolves, so match in place instead of copying the file
            stream(ctx, source, true, |ctx, t| {
                if tuple_key(t) == kmid {
                    for &r in &chunk.tuples {
                        ctx.emit(t, r)?;
                    }
                }
                Ok(())
            })?;
            ctx.release(chunk.held)?;
            out.stalled += 1;
            continue;
        }
        let temp = ctx.store.create_file();
        let mut buf: Vec<u64> = Vec::with_capacity(b);
        let mut written = 0;
        let mut range: Option<(u64, u64)> = None;
        stream(ctx, source, is_temp, |ctx, t| {
            let k = tuple_key(t);
            if k <= kmid {
                for &r in matches_of(&chunk.tuples, k) {
                    ctx.emit(t, r)?;
                }
            }
            if k >= kmid {
                buf.push(t);
                written += 1;
                range = Some(range.map_or((k, k), |(lo, hi)| (lo.min(k), hi.max(k))));
                if buf.len() == b {
                    flush_temp(ctx, temp, &mut buf)?;
                }
            }
            Ok(())
        })?;
        flush_temp(ctx, temp, &mut buf)?;
        ctx.release(chunk.held)?;
        if is_temp {
            ctx.store.delete_file(source)?;
        }
        out.sizes.push(written);
        if written == 0 {
            ctx.store.delete_file(temp)?;
            break;
        }
        source = temp;
        deferred = range;
    }
    ctx.release(b)?;
    Ok(out)
}

fn flush_temp(ctx: &mut Ctx, temp: FileId, buf: &mut Vec<u64>) -> Result<()> {
    if !buf.is_empty() {
        let len = buf.len();
        ctx.store.write_block(temp, buf, &mut ctx.ws)?;
        ctx.ws.acquire(len)?;
        ctx.temp_io.writes += 1;
        buf.clear();
    }
    Ok(())
}

/// Joins two approximately sorted relations bucket by bucket.
pub fn join_asr_asr(store: &mut BlockStore, left: &ApproxRun, right: &ApproxRun) -> Result<JoinResult> {
    require_join_memory(store)?;
    let mut ctx = Ctx::new(store)?;
    let mut cases = CaseCounts::default();
    let mut scans = 0;
    if left.is_empty() || right.is_empty() {
        return ctx.finish(cases, Vec::new(), 0, 0);
    }
    let (m, b) = (ctx.m(), ctx.b);
    let batch_blocks = (m - 2 * b) / b;
    for ai in left.buckets.iter().filter(|bk| bk.count > 0) {
        let crossing: Vec<&BucketDescriptor> =
            right.buckets.iter().filter(|bj| bj.count > 0 && ai.ranges_meet(bj)).collect();
        if crossing.is_empty() {
            continue;
        }
        let ai_blocks = ctx.store.block_count(ai.file)?;
        if is_m_tolerable(ai, m, b) {
            cases.tolerable += 1;
            let mem = load_blocks(&mut ctx, ai.file, 0..ai_blocks)?;
            scans += 1;
            for bj in crossing {
                scans += 1;
                stream(&mut ctx, bj.file, false, |ctx, t| {
                    for &a in matches_of(&mem, tuple_key(t)) {
                        ctx.emit(a, t)?;
                    }
                    Ok(())
                })?;
            }
            ctx.release(mem.len())?;
            continue;
        }
        for bj in crossing {
            let bj_blocks = ctx.store.block_count(bj.file)?;
            if is_m_tolerable(bj, m, b) {
                cases.tolerable += 1;
                let mem = load_blocks(&mut ctx, bj.file, 0..bj_blocks)?;
                scans += 2;
                stream(&mut ctx, ai.file, false, |ctx, t| {
                    for &r in matches_of(&mem, tuple_key(t)) {
                        ctx.emit(t, r)?;
                    }
                    Ok(())
                })?;
                ctx.release(mem.len())?;
                continue;
            }
            cases.batched += 1;
            let left_is_big = ai.count >= bj.count;
            let (big, big_blocks, small) = if left_is_big { (ai, ai_blocks, bj) } else { (bj, bj_blocks, ai) };
            for first in (0..big_blocks).step_by(batch_blocks) {
                let mem = load_blocks(&mut ctx, big.file, first..(first + batch_blocks).min(big_blocks))?;
                scans += 2;
                stream(&mut ctx, small.file, false, |ctx, t| {
                    for &x in matches_of(&mem, tuple_key(t)) {
                        if left_is_big {
                            ctx.emit(x, t)?;
                        } else {
                            ctx.emit(t, x)?;
                        }
                    }
                    Ok(())
                })?;
                ctx.release(mem.len())?;
            }
        }
    }
    ctx.finish(cases, Vec::new(), scans, 0)
}

/// Textbook merge join of two sorted relations, reading both in full.
pub fn classic_merge_join(store: &mut BlockStore, left: &[FileId], right: &[FileId]) -> Result<JoinResult> {
    let mut ctx = Ctx::new(store)?;
    let mut l = Cursor::new(ctx.store, left)?;
    let mut r = Cursor::new(ctx.store, right)?;
    loop {
        let (Some(kl), Some(kr)) = (l.peek_key(&mut ctx)?, r.peek_key(&mut ctx)?) else {
            break;
        };
        if kl < kr {
            l.advance();
        } else if kl > kr {
            r.advance();
        } else {
            let mut group = Vec::new();
            while l.peek_key(&mut ctx)? == Some(kl) {
                group.push(l.current());
                l.advance();
            }
            while r.peek_key(&mut ctx)? == Some(kl) {
                let t = r.current();
                for &a in &group {
                    ctx.emit(a, t)?;
                }
                r.advance();
            }
        }
    }
    l.drain(&mut ctx)?;
    r.drain(&mut ctx)?;
    ctx.finish(CaseCounts::default(), Vec::new(), 0, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinShape {
    OneSide,
    TwoSide,
}

impl fmt::Display for JoinShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinShape::OneSide => "one-side",
            JoinShape::TwoSide => "two-side",
        })
    }
}

impl FromStr for JoinShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-side" => Ok(JoinShape::OneSide),
            "two-side" => Ok(JoinShape::TwoSide),
            other => Err(Error::InvalidParams(format!("unknown join shape {other:?}"))),
        }
    }
}

/// Best and worst block-I/O envelopes, constants set to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinEnvelope {
    pub best: f64,
    pub worst: f64,
}

/// Cost envelopes for sorting and joining. `n1` is the approximately
/// sorted side; `overlapped` is the bucket-overlap count used by the
/// two-side worst case.
#[allow(clippy::too_many_arguments)]
pub fn predicted_join_cost(
    shape: JoinShape,
    n1: usize,
    n2: usize,
    m: usize,
    b: usize,
    p: usize,
    k: usize,
    overlapped: usize,
) -> Result<JoinEnvelope> {
    if b == 0 || m == 0 {
        return Err(Error::InvalidParams("m and b must be positive".into()));
    }
    let (n1b, n2b, k) = (n1 as f64 / b as f64, n2 as f64 / b as f64, k as f64);
    Ok(match shape {
        JoinShape::OneSide => {
            let sort_sr = if n2b > 1.0 { n2b * n2b.log2() } else { 0.0 };
            let buckets = (p as f64).powf(k);
            JoinEnvelope {
                best: n1b + n2b + k * n1b + sort_sr,
                worst: n1b * (n2 as f64 / (m as f64 * buckets)) + n2b + k * n1b + sort_sr,
            }
        }
        JoinShape::TwoSide => JoinEnvelope {
            best: n1b + n2b + k * n1b + k * n2b,
            worst: n1b + overlapped as f64 * n2b + k * n1b + k * n2b,
        },
    })
}
