//! Permutations of `1..=n` and the distance metrics used to grade an
//! approximate sort.
//!
//! Four metrics are provided. `errors` counts positions whose element
//! differs, `external errors` counts positions whose element sits in the
//! wrong block of width `b`, Spearman's footrule sums the absolute rank
//! displacement, and ESP sums the absolute block displacement. The two
//! block-granular metrics ignore any disorder inside a block, which costs
//! nothing in the I/O model.
//!
//! All metrics are right-invariant pseudo-metrics, so the size of a ball
//! around any center equals the size of the ball around the identity.

use std::fmt;

use crate::error::{Error, Result};

/// Largest `n` for which [`ball_size_exhaustive`] walks all of `S_n`.
pub const ENUMERATION_LIMIT: usize = 9;

/// A bijection on `1..=n`, stored 1-indexed: `get(i)` is the element at rank `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    entries: Vec<usize>,
}

impl Permutation {
    /// Validates that `entries` is a bijection on `1..=entries.len()`.
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut seen = vec![false; n];
        for (pos, &v) in entries.iter().enumerate() {
            if v == 0 || v > n {
                return Err(Error::NotAPermutation {
                    n,
                    reason: format!("value {v} at position {} outside 1..={n}", pos + 1),
                });
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::NotAPermutation {
                    n,
                    reason: format!("value {v} repeated"),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Uniformly random permutation of `1..=n`.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut entries: Vec<usize> = (1..=n).collect();
        entries.shuffle(rng);
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "identity permutation needs n >= 1");
        Self {
            entries: (1..=n).collect(),
        }
    }

    /// Maps arbitrary orderable keys onto ranks. Equal keys receive
    /// increasing ranks in input order, so the mapping is total on real data.
    pub fn from_keys<K: Ord>(keys: &[K]) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut order: Vec<usize> = (0..keys.len()).collect();
        // stable sort keeps equal keys in input order
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let mut entries = vec![0; keys.len()];
        for (rank, &pos) in order.iter().enumerate() {
            entries[pos] = rank + 1;
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Element at 1-indexed position `i`.
    pub fn get(&self, i: usize) -> usize {
        self.entries[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// `(p ∘ t)(i) = p(t(i))`.
    pub fn compose(&self, t: &Permutation) -> Result<Permutation> {
        same_len(self, t)?;
        Ok(Permutation {
            entries: t.entries.iter().map(|&j| self.entries[j - 1]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.entries.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { entries: inv }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.entries)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Number of items per I/O block. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockWidth(usize);

impl BlockWidth {
    pub fn new(b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::ZeroBlockWidth);
        }
        Ok(Self(b))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// 1-indexed block number of 1-indexed rank `x`, i.e. `ceil(x / b)`.
    #[inline]
    pub fn block_of(self, x: usize) -> usize {
        x.div_ceil(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Errors,
    ExternalErrors,
    Spearman,
    Esp,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Errors,
        MetricKind::ExternalErrors,
        MetricKind::Spearman,
        MetricKind::Esp,
    ];

    /// Distance under this metric. `b` is ignored by the rank metrics.
    pub fn distance(self, p: &Permutation, q: &Permutation, b: BlockWidth) -> Result<u64> {
        match self {
            MetricKind::Errors => d_errors(p, q),
            MetricKind::ExternalErrors => d_ee(p, q, b),
            MetricKind::Spearman => d_sp(p, q),
            MetricKind::Esp => d_esp(p, q, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Errors => "errors",
            MetricKind::ExternalErrors => "ee",
            MetricKind::Spearman => "sp",
            MetricKind::Esp => "esp",
        }
    }
}

fn same_len(p: &Permutation, q: &Permutation) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(())
}

fn pairs<'a>(p: &'a Permutation, q: &'a Permutation) -> Result<impl Iterator<Item = (usize, usize)> + 'a> {
    same_len(p, q)?;
    Ok(p.entries.iter().copied().zip(q.entries.iter().copied()))
}

/// Number of positions where `p` and `q` disagree.
pub fn d_errors(p: &Permutation, q: &Permutation) -> Result<u64> {
    Ok(pairs(p, q)?.filter(|(x, y)| x != y).count() as u64)
}

/// Number of positions whose elements fall in different blocks of width `b`.
pub fn d_ee(p: &Permutation, q: &Permutation, b: BlockWidth) -> Result<u64> {
    Ok(pairs(p, q)?
        .filter(|&(x, y)| b.block_of(x) != b.block_of(y))
        .count() as u64)
}

/// Spearman's footrule.
pub fn d_sp(p: &Permutation, q: &Permutation) -> Result<u64> {
    Ok(pairs(p, q)?.map(|(x, y)| x.abs_diff(y) as u64).sum())
}

/// External Spearman's footrule: footrule over block numbers.
pub fn d_esp(p: &Permutation, q: &Permutation, b: BlockWidth) -> Result<u64> {
    Ok(pairs(p, q)?
        .map(|(x, y)| b.block_of(x).abs_diff(b.block_of(y)) as u64)
        .sum())
}

/// Counts permutations of `1..=n` within distance `r` of the identity by
/// walking all of `S_n` (Heap's algorithm).
pub fn ball_size_exhaustive(n: usize, b: BlockWidth, r: u64, metric: MetricKind) -> Result<u64> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let id = Permutation::identity(n);
    let mut count = 0u64;
    for_each_permutation(n, |p| {
        // lengths always match here
        if metric.distance(p, &id, b).unwrap() <= r {
            count += 1;
        }
    });
    Ok(count)
}

/// Calls `f` once for every permutation of `1..=n`.
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&Permutation)) {
    let mut p = Permutation::identity(n);
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.entries.swap(0, i);
            } else {
                p.entries.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
