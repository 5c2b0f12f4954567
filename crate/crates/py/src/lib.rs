//! Python bindings: metrics, EASORT runs, bounds, Bloom filters, the
//! VBF-Tree index and approximate joins.

use ::easort::amj::{self, JoinStrategy};
use ::easort::{bounds, perm, BlockStore, BlockWidth, CostParams, EasortConfig, IoParams, Permutation, VbfTree};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: ::easort::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn permutation(v: Vec<usize>) -> PyResult<Permutation> {
    Permutation::new(v).map_err(py_err)
}

fn width(b: usize) -> PyResult<BlockWidth> {
    BlockWidth::new(b).map_err(py_err)
}

#[pyfunction]
fn d_errors(p: Vec<usize>, q: Vec<usize>) -> PyResult<u64> {
    perm::d_errors(&permutation(p)?, &permutation(q)?).map_err(py_err)
}

#[pyfunction]
fn d_ee(p: Vec<usize>, q: Vec<usize>, b: usize) -> PyResult<u64> {
    perm::d_ee(&permutation(p)?, &permutation(q)?, width(b)?).map_err(py_err)
}

#[pyfunction]
fn d_sp(p: Vec<usize>, q: Vec<usize>) -> PyResult<u64> {
    perm::d_sp(&permutation(p)?, &permutation(q)?).map_err(py_err)
}

#[pyfunction]
fn d_esp(p: Vec<usize>, q: Vec<usize>, b: usize) -> PyResult<u64> {
    perm::d_esp(&permutation(p)?, &permutation(q)?, width(b)?).map_err(py_err)
}

fn io_params(n: usize, m: usize, b: usize) -> PyResult<IoParams> {
    IoParams::new(n, m, b).map_err(py_err)
}

/// `(value, raw, clamped)` of the external-errors lower bound, per item.
#[pyfunction]
fn ee_lower_bound(n: usize, m: usize, b: usize, t: u64) -> PyResult<(f64, f64, bool)> {
    let c = bounds::ee_lower_bound(&io_params(n, m, b)?, t).map_err(py_err)?;
    Ok((c.value, c.raw, c.clamped))
}

#[pyfunction]
fn esp_lower_bound(n: usize, m: usize, b: usize, t: u64) -> PyResult<(f64, f64, bool)> {
    let c = bounds::esp_lower_bound(&io_params(n, m, b)?, t).map_err(py_err)?;
    Ok((c.value, c.raw, c.clamped))
}

#[pyfunction]
fn easort_esp_upper(n: usize, m: usize, b: usize, k: usize) -> PyResult<f64> {
    bounds::easort_esp_upper(&io_params(n, m, b)?, k).map_err(py_err)
}

#[pyfunction]
fn avg_esp_random(n: usize, b: usize) -> PyResult<f64> {
    Ok(bounds::rational_to_f64(&bounds::avg_esp_random_exact(n, b).map_err(py_err)?))
}

#[pyfunction]
fn expected_bucket_distortion(n: usize, m: usize, b: usize, k: usize) -> PyResult<f64> {
    Ok(bounds::rational_to_f64(
        &bounds::expected_bucket_distortion_exact(n, m, b, k).map_err(py_err)?,
    ))
}

/// One EASORT run over a key list.
#[pyclass(frozen)]
struct SortRun {
    #[pyo3(get)]
    output: Vec<u64>,
    /// `(lower, upper, count, fully_sorted)` per bucket; `None` is unbounded.
    #[pyo3(get)]
    buckets: Vec<(Option<u64>, Option<u64>, usize, bool)>,
    #[pyo3(get)]
    reads: u64,
    #[pyo3(get)]
    writes: u64,
    #[pyo3(get)]
    passes_used: usize,
    #[pyo3(get)]
    manifest: String,
}

#[pymethods]
impl SortRun {
    /// Output order as a permutation of `1..=n`.
    fn ranks(&self) -> PyResult<Vec<usize>> {
        Ok(Permutation::from_keys(&self.output).map_err(py_err)?.into_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "SortRun(n={}, buckets={}, reads={}, writes={})",
            self.output.len(),
            self.buckets.len(),
            self.reads,
            self.writes
        )
    }
}

#[pyfunction]
#[pyo3(name = "easort", signature = (keys, m, b, k, seed=0))]
fn run_easort(keys: Vec<u64>, m: usize, b: usize, k: usize, seed: u64) -> PyResult<SortRun> {
    let mut store = BlockStore::new(io_params(keys.len(), m, b)?);
    let f = store.load_unmetered(&keys);
    let cfg = EasortConfig::new(k, seed).map_err(py_err)?;
    let run = ::easort::easort(&mut store, f, &cfg).map_err(py_err)?;
    let stats = store.stats();
    Ok(SortRun {
        output: run.output_keys(&store).map_err(py_err)?,
        buckets: run
            .buckets
            .iter()
            .map(|bk| (bk.lower, bk.upper, bk.count, bk.fully_sorted))
            .collect(),
        reads: stats.reads,
        writes: stats.writes,
        passes_used: run.passes_used,
        manifest: run.manifest(),
    })
}

#[pyclass]
struct BloomFilter(::easort::BloomFilter);

#[pymethods]
impl BloomFilter {
    #[new]
    fn new(n_keys: usize, fpp: f64) -> PyResult<Self> {
        Ok(Self(::easort::BloomFilter::with_capacity(n_keys, fpp).map_err(py_err)?))
    }

    fn insert(&mut self, key: u64) {
        self.0.insert(key);
    }

    fn __contains__(&self, key: u64) -> bool {
        self.0.contains(key)
    }

    #[getter]
    fn bit_len(&self) -> usize {
        self.0.bit_len()
    }

    #[getter]
    fn hash_count(&self) -> u32 {
        self.0.hash_count()
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.0.to_bytes()
    }
}

/// Point-query outcome with its I/O breakdown.
#[pyclass(frozen)]
struct QueryStats {
    #[pyo3(get)]
    found: bool,
    #[pyo3(get)]
    internal_reads: u64,
    #[pyo3(get)]
    leaf_reads: u64,
    #[pyo3(get)]
    matched_bfs: u64,
    #[pyo3(get)]
    data_reads: u64,
    #[pyo3(get)]
    false_positives: u64,
}

/// EASORT run plus a VBF-Tree over it, in a private block store.
#[pyclass]
struct VbfIndex {
    store: BlockStore,
    tree: VbfTree,
}

#[pymethods]
impl VbfIndex {
    #[new]
    #[pyo3(signature = (keys, m, b, k, fpp=0.01))]
    fn new(keys: Vec<u64>, m: usize, b: usize, k: usize, fpp: f64) -> PyResult<Self> {
        let mut store = BlockStore::new(io_params(keys.len(), m, b)?);
        let f = store.load_unmetered(&keys);
        let run = ::easort::easort(&mut store, f, &EasortConfig::new(k, 0).map_err(py_err)?).map_err(py_err)?;
        let cp = CostParams::for_run(&run).map_err(py_err)?.with_fpp(fpp);
        let tree = VbfTree::bulk_build(&run, &mut store, &cp).map_err(py_err)?;
        Ok(Self { store, tree })
    }

    fn point_query(&mut self, key: u64) -> PyResult<QueryStats> {
        let r = self.tree.point_query(&mut self.store, key).map_err(py_err)?;
        Ok(QueryStats {
            found: !r.hits.is_empty(),
            internal_reads: r.stats.internal_reads,
            leaf_reads: r.stats.leaf_reads,
            matched_bfs: r.stats.matched_bfs,
            data_reads: r.stats.data_reads,
            false_positives: r.stats.false_positives,
        })
    }

    fn range_query(&mut self, lo: u64, hi: u64) -> PyResult<Vec<u64>> {
        Ok(self.tree.range_query(&mut self.store, lo, hi).map_err(py_err)?.keys)
    }

    #[getter]
    fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    #[getter]
    fn internal_levels(&self) -> usize {
        self.tree.internal_levels()
    }
}

#[pyclass(frozen)]
struct JoinOutcome {
    /// `(left index, right index)` per match.
    #[pyo3(get)]
    pairs: Vec<(u32, u32)>,
    #[pyo3(get)]
    reads: u64,
    #[pyo3(get)]
    writes: u64,
    #[pyo3(get)]
    temp_reads: u64,
    #[pyo3(get)]
    temp_writes: u64,
}

/// Equijoin of two key lists. The left side is approximately sorted with
/// `k` passes; the right side is fully sorted (`one-side`) or also
/// approximately sorted (`two-side`).
#[pyfunction]
#[pyo3(signature = (left, right, m, b, k, shape="one-side", rescan=false))]
fn join(left: Vec<u32>, right: Vec<u32>, m: usize, b: usize, k: usize, shape: &str, rescan: bool) -> PyResult<JoinOutcome> {
    let shape: amj::JoinShape = shape.parse().map_err(py_err)?;
    let tuples = |keys: &[u32]| -> Vec<u64> {
        keys.iter()
            .enumerate()
            .map(|(i, &key)| amj::pack_tuple(key, i as u32))
            .collect()
    };
    let (l, r) = (tuples(&left), tuples(&right));
    let mut store = BlockStore::new(io_params(l.len() + r.len() + m + 1, m, b)?);
    let (a, _) = amj::approx_sort_relation(&mut store, &l, k, 0).map_err(py_err)?;
    let res = match shape {
        amj::JoinShape::OneSide => {
            let mut sorted = r;
            sorted.sort_unstable();
            let sr = store.load_unmetered(&sorted);
            let strategy = if rescan { JoinStrategy::Rescan } else { JoinStrategy::TempFile };
            amj::join_asr_sr(&mut store, &a, &[sr], strategy)
        }
        amj::JoinShape::TwoSide => {
            let (bside, _) = amj::approx_sort_relation(&mut store, &r, k, 0).map_err(py_err)?;
            amj::join_asr_asr(&mut store, &a, &bside)
        }
    }
    .map_err(py_err)?;
    Ok(JoinOutcome {
        pairs: res.pairs,
        reads: res.io.reads,
        writes: res.io.writes,
        temp_reads: res.temp_io.reads,
        temp_writes: res.temp_io.writes,
    })
}

#[pymodule]
fn easort_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(d_errors, m)?)?;
    m.add_function(wrap_pyfunction!(d_ee, m)?)?;
    m.add_function(wrap_pyfunction!(d_sp, m)?)?;
    m.add_function(wrap_pyfunction!(d_esp, m)?)?;
    m.add_function(wrap_pyfunction!(ee_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(esp_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(easort_esp_upper, m)?)?;
    m.add_function(wrap_pyfunction!(avg_esp_random, m)?)?;
    m.add_function(wrap_pyfunction!(expected_bucket_distortion, m)?)?;
    m.add_function(wrap_pyfunction!(run_easort, m)?)?;
    m.add_function(wrap_pyfunction!(join, m)?)?;
    m.add_class::<SortRun>()?;
    m.add_class::<BloomFilter>()?;
    m.add_class::<QueryStats>()?;
    m.add_class::<VbfIndex>()?;
    m.add_class::<JoinOutcome>()?;
    Ok(())
}
