//! Report builders behind the `easort` command. Every report is a CSV
//! string with a fixed header, fully determined by its arguments.

use easort::amj::{self, JoinShape, JoinStrategy};
use easort::easort::compute_bucket_count;
use easort::perm::{d_ee, d_errors, d_esp, d_sp};
use easort::{
    cost_model, materialize, BlockStore, BlockWidth, BoundsRow, CostParams, EasortConfig, Error, IoParams, Permutation,
    Result, StoreImage, VbfTree,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SORT_HEADER: &str = "n,m,b,k,t_measured,d_ee,d_esp,d_errors,d_sp,ee_lower,esp_lower,esp_upper_envelope,ee_upper";
pub const INDEX_HEADER: &str = "n,m,b,k,fpp,buckets,leaves,internal_levels,fanout,leaf_capacity,build_reads,build_writes,model_height,model_leaves_io";
pub const QUERY_HEADER: &str =
    "kind,lo,hi,result,matches,internal_reads,leaf_reads,matched_bfs,data_reads,false_positives,total_io,model_io";
pub const JOIN_HEADER: &str = "shape,n1,n2,m,b,k,reads,writes,temp_reads,temp_writes,sort_reads,sort_writes,predicted_best,predicted_worst,cardinality";

/// Generator for one trial. Each trial gets its own ChaCha stream, so
/// trials are independent of how many run or in which order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A uniform permutation of `1..=n`. With `duplicates = d > 1` each value
/// `v` becomes `ceil(v / d)`, so every key occurs at most `d` times.
pub fn generate_keys(n: usize, seed: u64, trial: u64, duplicates: usize) -> Vec<u64> {
    let d = duplicates.max(1) as u64;
    Permutation::random(n, &mut trial_rng(seed, trial))
        .into_vec()
        .into_iter()
        .map(|v| (v as u64).div_ceil(d))
        .collect()
}

pub fn gen_image(n: usize, m: usize, b: usize, seed: u64, duplicates: usize) -> Result<StoreImage> {
    if n == 0 {
        return Err(Error::InvalidParams("n >= 1 violated".into()));
    }
    Ok(StoreImage::single_file(&generate_keys(n, seed, 0, duplicates), m as u64, b as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SortRow {
    pub t: u64,
    pub d_ee: u64,
    pub d_esp: u64,
    pub d_errors: u64,
    pub d_sp: u64,
    pub bounds: BoundsRow,
}

impl SortRow {
    pub fn csv_row(&self) -> String {
        let bd = &self.bounds;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            bd.n,
            bd.m,
            bd.b,
            bd.k,
            self.t,
            self.d_ee,
            self.d_esp,
            self.d_errors,
            self.d_sp,
            bd.ee_lower.value,
            bd.esp_lower.value,
            bd.esp_upper_envelope,
            bd.ee_upper.value
        )
    }
}

/// Sorts `keys` with `k` passes and measures distortion against the
/// identity. Bounds use `t` rounded up to even.
pub fn sort_trial(keys: &[u64], m: usize, b: usize, k: usize, seed: u64) -> Result<(SortRow, String)> {
    let params = IoParams::new(keys.len(), m, b)?;
    let mut store = BlockStore::new(params);
    let input = store.load_unmetered(keys);
    let run = easort::easort(&mut store, input, &EasortConfig::new(k, seed)?)?;
    let t = store.stats().t();
    let out = materialize(&run, &store)?;
    let id = Permutation::identity(out.len());
    let w = BlockWidth::new(b)?;
    let row = SortRow {
        t,
        d_ee: d_ee(&out, &id, w)?,
        d_esp: d_esp(&out, &id, w)?,
        d_errors: d_errors(&out, &id)?,
        d_sp: d_sp(&out, &id)?,
        bounds: BoundsRow::compute(&params, t + t % 2, k)?,
    };
    Ok((row, run.manifest()))
}

pub struct SortArgs<'a> {
    pub input: Option<&'a [u64]>,
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
    pub duplicates: usize,
}

/// One CSV row per trial, plus the first trial's run manifest. Given input
/// keys, every trial sorts them; otherwise trial `i` sorts a fresh
/// permutation from stream `i`.
pub fn sort_report(a: &SortArgs) -> Result<(String, String)> {
    if a.trials == 0 {
        return Err(Error::InvalidParams("trials >= 1 violated".into()));
    }
    let rows: Vec<(SortRow, String)> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let generated;
            let keys = match a.input {
                Some(keys) => keys,
                None => {
                    generated = generate_keys(a.n, a.seed, i as u64, a.duplicates);
                    &generated
                }
            };
            sort_trial(keys, a.m, a.b, a.k, a.seed)
        })
        .collect::<Result<_>>()?;
    let mut csv = format!("{SORT_HEADER}\n");
    for (row, _) in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    Ok((csv, rows.into_iter().next().map(|r| r.1).unwrap_or_default()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn build_index(keys: &[u64], m: usize, b: usize, k: usize, fpp: f64) -> Result<(BlockStore, VbfTree, CostParams)> {
    let mut store = BlockStore::new(IoParams::new(keys.len(), m, b)?);
    let input = store.load_unmetered(keys);
    let run = easort::easort(&mut store, input, &EasortConfig::new(k, 0)?)?;
    let cp = CostParams::for_run(&run)?.with_fpp(fpp);
    let tree = VbfTree::bulk_build(&run, &mut store, &cp)?;
    Ok((store, tree, cp))
}

pub fn index_report(keys: &[u64], m: usize, b: usize, k: usize, fpp: f64) -> Result<String> {
    let (_, tree, cp) = build_index(keys, m, b, k, fpp)?;
    let model = cost_model(&cp).ok();
    let io = tree.build_io();
    Ok(format!(
        "{INDEX_HEADER}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        keys.len(),
        m,
        b,
        k,
        fpp,
        tree.bucket_count(),
        tree.leaf_count(),
        tree.internal_levels(),
        tree.fanout(),
        tree.leaf_capacity(),
        io.reads,
        io.writes,
        opt(model.map(|c| c.vbf_height as f64)),
        opt(model.map(|c| c.leaves_io)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Point(u64),
    Range(u64, u64),
}

pub fn query_report(keys: &[u64], m: usize, b: usize, k: usize, fpp: f64, queries: &[Query]) -> Result<String> {
    let (mut store, tree, cp) = build_index(keys, m, b, k, fpp)?;
    let model = cost_model(&cp).ok();
    let mut csv = format!("{QUERY_HEADER}\n");
    for &q in queries {
        let (kind, lo, hi, result, matches, st, model_io) = match q {
            Query::Point(key) => {
                let r = tree.point_query(&mut store, key)?;
                let found = if r.hits.is_empty() { "absent" } else { "found" };
                let predicted = model.map(|c| c.single_query(r.stats.matched_bfs as f64));
                ("point", key, key, found, r.hits.len(), r.stats, predicted)
            }
            Query::Range(lo, hi) => {
                let r = tree.range_query(&mut store, lo, hi)?;
                let predicted = model.map(|c| c.range_query(r.overlapped_buckets, r.stats.matched_bfs as f64));
                ("range", lo, hi, "scanned", r.keys.len(), r.stats, predicted)
            }
        };
        csv.push_str(&format!(
            "{kind},{lo},{hi},{result},{matches},{},{},{},{},{},{},{}\n",
            st.internal_reads,
            st.leaf_reads,
            st.matched_bfs,
            st.data_reads,
            st.false_positives,
            st.total_io(),
            opt(model_io)
        ));
    }
    Ok(csv)
}

pub struct JoinArgs {
    pub shape: JoinShape,
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub b: usize,
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
    pub duplicates: usize,
    pub strategy: JoinStrategy,
}

fn tuples(keys: &[u64]) -> Result<Vec<u64>> {
    keys.iter()
        .enumerate()
        .map(|(i, &k)| {
            let key = u32::try_from(k).map_err(|_| Error::OutOfRange(format!("join key {k} exceeds 32 bits")))?;
            Ok(amj::pack_tuple(key, i as u32))
        })
        .collect()
}

/// Passes enough for EASORT to finish sorting any input.
const FULL_SORT_PASSES: usize = 64;

fn join_trial(a: &JoinArgs, trial: u64) -> Result<String> {
    let left = tuples(&generate_keys(a.n1, a.seed, 2 * trial, a.duplicates))?;
    let right = tuples(&generate_keys(a.n2, a.seed, 2 * trial + 1, a.duplicates))?;
    let mut store = BlockStore::new(IoParams::new(a.n1 + a.n2 + a.m + 1, a.m, a.b)?);
    let (asr, mut sort_io) = amj::approx_sort_relation(&mut store, &left, a.k, a.seed)?;
    let p = compute_bucket_count(a.m, a.b)?;
    let (res, overlapped) = match a.shape {
        JoinShape::OneSide => {
            let (sr, io) = amj::approx_sort_relation(&mut store, &right, FULL_SORT_PASSES, a.seed)?;
            sort_io.reads += io.reads;
            sort_io.writes += io.writes;
            let files: Vec<_> = sr.buckets.iter().map(|bk| bk.file).collect();
            (amj::join_asr_sr(&mut store, &asr, &files, a.strategy)?, 1)
        }
        JoinShape::TwoSide => {
            let (bside, io) = amj::approx_sort_relation(&mut store, &right, a.k, a.seed)?;
            sort_io.reads += io.reads;
            sort_io.writes += io.writes;
            let overlapped = bside
                .buckets
                .iter()
                .map(|bj| asr.buckets.iter().filter(|ai| ai.ranges_meet(bj)).count())
                .max()
                .unwrap_or(0);
            (amj::join_asr_asr(&mut store, &asr, &bside)?, overlapped)
        }
    };
    let env = amj::predicted_join_cost(a.shape, a.n1, a.n2, a.m, a.b, p, a.k, overlapped)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        a.shape,
        a.n1,
        a.n2,
        a.m,
        a.b,
        a.k,
        res.io.reads,
        res.io.writes,
        res.temp_io.reads,
        res.temp_io.writes,
        sort_io.reads,
        sort_io.writes,
        env.best,
        env.worst,
        res.pairs.len()
    ))
}

pub fn join_report(a: &JoinArgs) -> Result<String> {
    if a.trials == 0 {
        return Err(Error::InvalidParams("trials >= 1 violated".into()));
    }
    let rows: Vec<String> = (0..a.trials as u64)
        .into_par_iter()
        .map(|i| join_trial(a, i))
        .collect::<Result<_>>()?;
    let mut csv = format!("{JOIN_HEADER}\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

pub fn bounds_report(n: usize, m: usize, b: usize, t: u64, k: usize) -> Result<String> {
    let row = BoundsRow::compute(&IoParams::new(n, m, b)?, t, k)?;
    Ok(format!("{}\n{}\n", BoundsRow::CSV_HEADER, row.csv_row()))
}

/// Whether an error stems from bad arguments rather than a failed run.
pub fn is_parameter_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParams(_)
            | Error::OutOfRange(_)
            | Error::OddIoCount(_)
            | Error::ZeroBlockWidth
            | Error::EmptySequence
            | Error::SampleTooSmall { .. }
            | Error::EnumerationLimit { .. }
    )
}
