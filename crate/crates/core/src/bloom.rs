//! Bloom filters over `u64` keys, sized from a target false-positive rate.
//!
//! Probe positions use double hashing `h1 + i*h2 mod s`, where `h1` and
//! `h2` are seeded XXH3 hashes of the key's little-endian bytes.

use std::f64::consts::LN_2;

use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};

const SEED_PRIMARY: u64 = 0x5eed_0001_b100_f117;
const SEED_STEP: u64 = 0x5eed_0002_b100_f117;

/// Default target false-positive probability.
pub const DEFAULT_FPP: f64 = 0.01;

fn check_fpp(fpp: f64) -> Result<()> {
    if !(fpp > 0.0 && fpp < 1.0) {
        return Err(Error::OutOfRange(format!("fpp {fpp} not in (0, 1)")));
    }
    Ok(())
}

/// Bits needed to hold `n_keys` keys at false-positive rate `fpp`:
/// `ceil(-n ln(fpp) / ln^2 2)`.
pub fn size_for(n_keys: usize, fpp: f64) -> Result<usize> {
    check_fpp(fpp)?;
    if n_keys == 0 {
        return Err(Error::InvalidParams("n_keys >= 1 violated".into()));
    }
    Ok(((-(n_keys as f64) * fpp.ln()) / (LN_2 * LN_2)).ceil() as usize)
}

/// `round(ln 2 * s / n_keys)`, at least 1.
pub fn optimal_hash_count(s: usize, n_keys: usize) -> u32 {
    ((LN_2 * s as f64 / n_keys.max(1) as f64).round() as u32).max(1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u8>,
    s: u64,
    h: u32,
    inserted: u64,
}

impl BloomFilter {
    pub fn new(s: usize, h: u32) -> Result<Self> {
        if s == 0 || h == 0 {
            return Err(Error::InvalidParams(format!("need s >= 1 and h >= 1 (s = {s}, h = {h})")));
        }
        Ok(Self {
            bits: vec![0; s.div_ceil(8)],
            s: s as u64,
            h,
            inserted: 0,
        })
    }

    /// A filter sized for `n_keys` keys at rate `fpp`.
    pub fn with_capacity(n_keys: usize, fpp: f64) -> Result<Self> {
        let s = size_for(n_keys, fpp)?;
        Self::new(s, optimal_hash_count(s, n_keys))
    }

    pub fn bit_len(&self) -> usize {
        self.s as usize
    }

    pub fn hash_count(&self) -> u32 {
        self.h
    }

    /// Number of `insert` calls, repeats included.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    fn positions(&self, key: u64) -> impl Iterator<Item = u64> + '_ {
        let bytes = key.to_le_bytes();
        let h1 = xxh3_64_with_seed(&bytes, SEED_PRIMARY);
        let h2 = xxh3_64_with_seed(&bytes, SEED_STEP) | 1;
        (0..self.h as u64).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.s)
    }

    pub fn insert(&mut self, key: u64) {
        let pos: Vec<u64> = self.positions(key).collect();
        for p in pos {
            self.bits[(p / 8) as usize] |= 1 << (p % 8);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, key: u64) -> bool {
        self.positions(key).all(|p| self.bits[(p / 8) as usize] & (1 << (p % 8)) != 0)
    }

    /// Expected false-positive rate at the current load, `(1 - e^(-h n / s))^h`.
    pub fn expected_fpp(&self) -> f64 {
        let h = self.h as f64;
        (1.0 - (-h * self.inserted as f64 / self.s as f64).exp()).powf(h)
    }

    pub fn serialized_len(&self) -> usize {
        8 + 4 + 8 + self.bits.len()
    }

    /// `u64 s, u32 h, u64 inserted`, then the bit array padded to bytes,
    /// all little-endian.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.s.to_le_bytes());
        out.extend_from_slice(&self.h.to_le_bytes());
        out.extend_from_slice(&self.inserted.to_le_bytes());
        out.extend_from_slice(&self.bits);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        self.write_bytes(&mut out);
        out
    }

    /// Parses a filter from the front of `bytes`; returns it with the number
    /// of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize)> {
        let corrupt = |msg: &str| Error::CorruptImage(format!("bloom filter: {msg}"));
        if bytes.len() < 20 {
            return Err(corrupt("truncated header"));
        }
        let s = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let h = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let inserted = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        if s == 0 || h == 0 {
            return Err(corrupt("zero size or hash count"));
        }
        let nbytes = usize::try_from(s.div_ceil(8)).map_err(|_| corrupt("size overflow"))?;
        let end = 20usize.checked_add(nbytes).ok_or_else(|| corrupt("size overflow"))?;
        if bytes.len() < end {
            return Err(corrupt("truncated bit array"));
        }
        Ok((
            Self {
                bits: bytes[20..end].to_vec(),
                s,
                h,
                inserted,
            },
            end,
        ))
    }
}
