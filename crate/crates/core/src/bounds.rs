//! Closed-form distortion bounds for approximate sorting in the I/O model.
//!
//! Lower bounds combine the I/O information budget (how many distinct
//! outputs `t` block transfers can produce) with ball-size estimates for the
//! EE and ESP metrics. Upper bounds describe the expected distortion of
//! [`crate::easort`] output. Asymptotic expressions are evaluated with their
//! hidden constants set to 1 and are labelled "envelope".
//!
//! All real-valued calculators work in base-2 logs and never materialize
//! factorials, so they stay finite for `n` up to `2^60`.

use std::f64::consts::{E, LOG2_E};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::io_sim::IoParams;

/// A bound value together with the value before clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

impl Clamped {
    fn within(raw: f64, lo: f64, hi: f64) -> Self {
        let value = raw.clamp(lo, hi);
        Self {
            value,
            raw,
            clamped: value != raw,
        }
    }
}

/// `H2(p) = -p lg p - (1-p) lg (1-p)`, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p} not in [0, 1]")));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// Mean ESP distance of a uniform random permutation from the identity,
/// `(1/n) * sum_i sum_j |ceil(i/b) - ceil(j/b)|`. Requires `b | n`.
pub fn avg_esp_random_exact(n: usize, b: usize) -> Result<BigRational> {
    if b == 0 || n == 0 || n % b != 0 {
        return Err(Error::InvalidParams(format!("b = {b} must divide n = {n}")));
    }
    // b^2 * sum over block pairs |u - v| = b^2 * B (B^2 - 1) / 3 with B = n/b
    let blocks = BigUint::from(n / b);
    let pair_sum = &blocks * (&blocks * &blocks - 1u32) / 3u32;
    let total = pair_sum * BigUint::from(b) * BigUint::from(b);
    Ok(BigRational::new(total.into(), BigUint::from(n).into()))
}

/// Mean EE distance of a uniform random permutation from the identity.
pub fn avg_ee_random(n: usize, b: usize) -> Result<f64> {
    if b == 0 || b > n {
        return Err(Error::InvalidParams(format!("need 1 <= b <= n (n = {n}, b = {b})")));
    }
    Ok((n - b) as f64)
}

fn lg_factorial(x: f64) -> f64 {
    libm::lgamma(x + 1.0) * LOG2_E
}

fn lg_binomial(n: f64, k: f64) -> f64 {
    lg_factorial(n) - lg_factorial(k) - lg_factorial(n - k)
}

fn check_even(t: u64) -> Result<()> {
    if t % 2 == 1 {
        return Err(Error::OddIoCount(t));
    }
    Ok(())
}

/// Base-2 log of the number of distinct outputs reachable with `t` I/Os:
/// `t lg(n/b) + (t/2) lg C(m, b) + min(n/b, t/2) lg b!`.
pub fn code_size_upper_log2(params: &IoParams, t: u64) -> Result<f64> {
    check_even(t)?;
    let (n, m, b, t) = (params.n() as f64, params.m() as f64, params.b() as f64, t as f64);
    Ok(t * (n / b).log2() + t / 2.0 * lg_binomial(m, b) + (n / b).min(t / 2.0) * lg_factorial(b))
}

/// `(t/2 - min(n/b, t/2)) * (b/n) * lg b`, the write-budget term shared by
/// both lower bounds.
fn surplus_term(n: f64, b: f64, t: f64) -> f64 {
    (t / 2.0 - (n / b).min(t / 2.0)) * (b / n) * b.log2()
}

/// `(t/n) lg(n/b) + (t/2)(b/n) lg(e m)`.
fn transfer_term(n: f64, m: f64, b: f64, t: f64) -> f64 {
    t / n * (n / b).log2() + t / 2.0 * (b / n) * (E * m).log2()
}

/// Lower bound on the mean per-item external-error rate `alpha = r/n` of
/// any algorithm using `t` I/Os, clamped to `[0, (n-1)/n]`.
pub fn ee_lower_bound(params: &IoParams, t: u64) -> Result<Clamped> {
    check_even(t)?;
    let (n, m, b, t) = (params.n() as f64, params.m() as f64, params.b() as f64, t as f64);
    let lg_ratio =
        n.log2() + surplus_term(n, b, t) - (1.0 + LOG2_E + 2.0 * b.log2() + transfer_term(n, m, b, t));
    let raw = lg_ratio / (n / b).log2();
    Ok(Clamped::within(raw, 0.0, (n - 1.0) / n))
}

/// Lower bound on the mean ESP distance `r` of any algorithm using `t` I/Os,
/// clamped below at 0.
pub fn esp_lower_bound(params: &IoParams, t: u64) -> Result<Clamped> {
    check_even(t)?;
    let (n, m, b, t) = (params.n() as f64, params.m() as f64, params.b() as f64, t as f64);
    let lg_first =
        2.0 * n.log2() + surplus_term(n, b, t) - (2.0 * LOG2_E + (2.0 * b).log2() + transfer_term(n, m, b, t));
    let raw = lg_first.exp2() - n;
    Ok(Clamped::within(raw, 0.0, f64::INFINITY))
}

fn check_passes(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParams("k >= 1 violated".into()));
    }
    Ok(())
}

/// Envelope of the expected ESP distance after `k` passes:
/// `n^2 b^(k-1) / m^k + n^2 b^(2k) / m^(2k)`.
pub fn easort_esp_upper(params: &IoParams, k: usize) -> Result<f64> {
    check_passes(k)?;
    let (n, m, b, k) = (params.n() as f64, params.m() as f64, params.b() as f64, k as f64);
    let lead = 2.0 * n.log2() + (k - 1.0) * b.log2() - k * m.log2();
    let tail = 2.0 * n.log2() + 2.0 * k * (b.log2() - m.log2());
    Ok(lead.exp2() + tail.exp2())
}

/// Expected EE distance after `k` passes:
/// `(1 - M/n)(n - M) + 2n b^k / m^k` with `M = m^k / b^(k-1)`, and 0 once
/// `M >= n`. Values above `n` are clamped, with the raw value kept.
pub fn easort_ee_upper(params: &IoParams, k: usize) -> Result<Clamped> {
    check_passes(k)?;
    let fits = BigUint::from(params.m()).pow(k as u32)
        >= BigUint::from(params.n()) * BigUint::from(params.b()).pow(k as u32 - 1);
    if fits {
        return Ok(Clamped::within(0.0, 0.0, params.n() as f64));
    }
    let (n, m, b, k) = (params.n() as f64, params.m() as f64, params.b() as f64, k as f64);
    let mem = (k * m.log2() - (k - 1.0) * b.log2()).exp2();
    let raw = (1.0 - mem / n) * (n - mem) + 2.0 * n * (k * (b.log2() - m.log2())).exp2();
    Ok(Clamped::within(raw, 0.0, n))
}

/// `C(n, k)` as a big integer; 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn falling(n: u64, r: u64) -> BigUint {
    (0..r).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i))
}

/// `C(n, r) * r!`, bounding the errors ball.
pub fn ball_bound_errors(n: u64, r: u64) -> BigUint {
    if r > n {
        return ball_bound_errors(n, n);
    }
    falling(n, r)
}

/// `C(n, r) * r! * b^(n-r)`, bounding the EE ball.
pub fn ball_bound_ee(n: u64, b: u64, r: u64) -> BigUint {
    let r = r.min(n);
    falling(n, r) * BigUint::from(b).pow((n - r) as u32)
}

/// `(2b)^n * C(n + r, r)`, bounding the ESP ball.
pub fn ball_bound_esp(n: u64, b: u64, r: u64) -> BigUint {
    BigUint::from(2 * b).pow(n as u32) * binomial(n + r, r)
}

/// Number of (sample choice, bucket) pairs producing a one-pass bucket of
/// length `l`, when `m` sample ranks are drawn from `1..=n` and split into
/// `p` buckets of `m/p` samples each. Requires `p | m`.
pub fn bucket_length_freq(n: u64, m: u64, p: u64, l: u64) -> Result<BigUint> {
    if p == 0 || m % p != 0 || m > n {
        return Err(Error::InvalidParams(format!("need p | m <= n (n = {n}, m = {m}, p = {p})")));
    }
    let q = m / p;
    if l < q || l > n - m + q {
        return Ok(BigUint::zero());
    }
    // every bucket but the last ends on a sample; the last ends at n
    let ending_on_sample = binomial(l - 1, q - 1) * binomial(n - l, m - q);
    let last = if m > q {
        binomial(l, q) * binomial(n - l - 1, m - q - 1)
    } else if l == n {
        binomial(n, m)
    } else {
        BigUint::zero()
    };
    Ok(BigUint::from(p - 1) * ending_on_sample + last)
}

/// Largest `n` accepted by [`expected_bucket_distortion_exact`].
pub const EXACT_ORACLE_MAX_N: usize = 60;

/// Expected ESP distance of one-pass output for a uniformly random input,
/// under the model where each bucket holds a uniformly shuffled run of
/// consecutive ranks. Sums over every sample choice by bucket start and
/// length, so it stays exact for small `n`.
pub fn expected_bucket_distortion_exact(n: usize, m: usize, b: usize, k: usize) -> Result<BigRational> {
    if k != 1 {
        return Err(Error::OutOfRange(format!("exact oracle supports k = 1 only (got {k})")));
    }
    if n > EXACT_ORACLE_MAX_N {
        return Err(Error::OutOfRange(format!("n = {n} exceeds {EXACT_ORACLE_MAX_N}")));
    }
    let params = IoParams::new(n, m, b)?;
    let p = crate::easort::compute_bucket_count(m, b)?;
    let (n, m) = (params.n() as u64, params.m() as u64);
    let block = |x: u64| x.div_ceil(b as u64);
    // pair_sum(j, l) = sum over x, y in [j, j + l) of |block(x) - block(y)|
    let pair_sum = |j: u64, l: u64| -> u64 {
        let mut s = 0;
        for x in j..j + l {
            for y in j..x {
                s += block(x) - block(y);
            }
        }
        2 * s
    };
    // sample index closing bucket i (1-based), matching select_pivots
    let bound = |i: u64| i * m / p as u64;
    let p = p as u64;

    let mut by_length: Vec<BigUint> = vec![BigUint::zero(); n as usize + 1];
    for i in 1..=p {
        let (a0, a1) = (bound(i - 1), bound(i));
        for l in 1..=n {
            for j in 1..=n - l + 1 {
                let before = if i == 1 {
                    BigUint::from(u64::from(j == 1))
                } else if j >= 2 && a0 >= 1 {
                    binomial(j - 2, a0 - 1)
                } else {
                    BigUint::zero()
                };
                if before.is_zero() {
                    continue;
                }
                let rest = if i == p {
                    if j + l - 1 != n {
                        continue;
                    }
                    binomial(l, m - a0)
                } else {
                    let inside = a1 - a0;
                    if inside == 0 {
                        continue;
                    }
                    binomial(l - 1, inside - 1) * binomial(n + 1 - j - l, m - a1)
                };
                if rest.is_zero() {
                    continue;
                }
                by_length[l as usize] += before * rest * BigUint::from(pair_sum(j, l));
            }
        }
    }
    let mut total = BigRational::zero();
    for (l, weight) in by_length.into_iter().enumerate().skip(1) {
        if !weight.is_zero() {
            total += BigRational::new(weight.into(), BigUint::from(l).into());
        }
    }
    Ok(total / BigRational::from_integer(binomial(n, m).into()))
}

/// Converts an exact rational to `f64`.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One row of the bounds report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub t: u64,
    pub k: usize,
    pub ee_lower: Clamped,
    pub esp_lower: Clamped,
    pub esp_upper_envelope: f64,
    pub ee_upper: Clamped,
}

impl BoundsRow {
    pub const CSV_HEADER: &'static str = "n,m,b,t,k,ee_lower,esp_lower,esp_upper_envelope,ee_upper,ee_upper_raw,ee_lower_clamped,esp_lower_clamped,ee_upper_clamped";

    pub fn compute(params: &IoParams, t: u64, k: usize) -> Result<Self> {
        Ok(Self {
            n: params.n(),
            m: params.m(),
            b: params.b(),
            t,
            k,
            ee_lower: ee_lower_bound(params, t)?,
            esp_lower: esp_lower_bound(params, t)?,
            esp_upper_envelope: easort_esp_upper(params, k)?,
            ee_upper: easort_ee_upper(params, k)?,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.b,
            self.t,
            self.k,
            self.ee_lower.value,
            self.esp_lower.value,
            self.esp_upper_envelope,
            self.ee_upper.value,
            self.ee_upper.raw,
            self.ee_lower.clamped,
            self.esp_lower.clamped,
            self.ee_upper.clamped
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, b: usize) -> IoParams {
        IoParams::new(n, m, b).unwrap()
    }

    fn lg_big(x: &BigUint) -> f64 {
        let bits = x.bits();
        if bits <= 60 {
            return x.to_f64().unwrap().log2();
        }
        let top = (x >> (bits - 60) as usize).to_f64().unwrap();
        top.log2() + (bits - 60) as f64
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn avg_esp_matches_double_sum() {
        for b in 1..=6usize {
            for blocks in 1..=8usize {
                let n = b * blocks;
                let mut s = 0i64;
                for i in 1..=n {
                    for j in 1..=n {
                        s += (i.div_ceil(b) as i64 - j.div_ceil(b) as i64).abs();
                    }
                }
                let want = BigRational::new(s.into(), (n as i64).into());
                assert_eq!(avg_esp_random_exact(n, b).unwrap(), want, "n={n} b={b}");
            }
        }
        assert_eq!(avg_esp_random_exact(2, 1).unwrap(), BigRational::one());
        assert!(avg_esp_random_exact(7, 2).is_err());
    }

    #[test]
    fn avg_ee_values() {
        assert_eq!(avg_ee_random(100, 10).unwrap(), 90.0);
        assert_eq!(avg_ee_random(8, 8).unwrap(), 0.0);
        assert_eq!(avg_ee_random(12, 2).unwrap(), 10.0);
        assert!(avg_ee_random(3, 4).is_err());
    }

    #[test]
    fn code_size_examples() {
        let p = params(100, 16, 4);
        assert_eq!(code_size_upper_log2(&p, 0).unwrap(), 0.0);
        let want = 2.0 * 25f64.log2() + 1820f64.log2() + 24f64.log2();
        assert!((code_size_upper_log2(&p, 2).unwrap() - want).abs() < 1e-9);
        assert!(matches!(code_size_upper_log2(&p, 3), Err(Error::OddIoCount(3))));
        let mut prev = 0.0;
        for t in (0..400).step_by(2) {
            let v = code_size_upper_log2(&p, t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn code_size_matches_big_integers() {
        for (n, m, b) in [(20usize, 8usize, 2usize), (30, 12, 3), (24, 10, 4)] {
            let p = params(n, m, b);
            for t in (0..=40u64).step_by(2) {
                let nb = (n / b) as u64;
                let exact = BigUint::from(nb).pow(t as u32)
                    * binomial(m as u64, b as u64).pow((t / 2) as u32)
                    * falling(b as u64, b as u64).pow(nb.min(t / 2) as u32);
                let got = code_size_upper_log2(&p, t).unwrap();
                assert!((got - lg_big(&exact)).abs() < 1e-6 * got.max(1.0), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn ee_lower_at_zero_io_approaches_one() {
        let mut prev = 0.0;
        for e in [10u32, 16, 24, 40, 60] {
            let p = params(1usize << e, 64, 4);
            let a = ee_lower_bound(&p, 0).unwrap();
            assert!(a.value > 0.0 && a.value >= prev);
            prev = a.value;
        }
        assert!(prev > 0.9);
    }

    #[test]
    fn ee_lower_closed_form_at_k_passes() {
        // at t = 2k n/b the bound reduces to
        // 1 - 2k/b - k/c - (1 + (k+1) lg e + 2 lg b) / lg(n/b), with c = log_{m/b}(n/b)
        for (n, m, b) in [(1usize << 20, 1usize << 10, 16usize), (1 << 30, 1 << 12, 8), (1 << 40, 1 << 16, 32)] {
            let p = params(n, m, b);
            for k in 1..=3u64 {
                let t = 2 * k * (n / b) as u64;
                let raw = ee_lower_bound(&p, t).unwrap().raw;
                let (nf, mf, bf, kf) = (n as f64, m as f64, b as f64, k as f64);
                let c = (nf / bf).log2() / (mf / bf).log2();
                let want = 1.0 - 2.0 * kf / bf - kf / c - (1.0 + (kf + 1.0) * LOG2_E + 2.0 * bf.log2()) / (nf / bf).log2();
                assert!((raw - want).abs() < 1e-9, "n={n} k={k}: {raw} vs {want}");
            }
        }
    }

    #[test]
    fn ee_lower_clamps_and_rejects_odd() {
        let p = params(1 << 20, 1 << 10, 16);
        let a = ee_lower_bound(&p, 2 * (1 << 16)).unwrap();
        assert!(a.clamped && a.value == 0.0 && a.raw < 0.0);
        assert!(matches!(ee_lower_bound(&p, 7), Err(Error::OddIoCount(7))));
        let huge = ee_lower_bound(&p, 1 << 40).unwrap();
        assert_eq!(huge.value, 0.0);
    }

    #[test]
    fn esp_lower_closed_form_at_k_passes() {
        // (bound + n) / n = n b^(k-2) / (e m)^k / (2 e^2 (n/b)^(2k/b))
        for (n, m, b) in [(1usize << 16, 256usize, 4usize), (1 << 20, 1 << 10, 16), (1 << 24, 1 << 12, 8)] {
            let p = params(n, m, b);
            for k in 1..=3i32 {
                let t = 2 * k as u64 * (n / b) as u64;
                let got = esp_lower_bound(&p, t).unwrap().raw / n as f64 + 1.0;
                let (nf, mf, bf) = (n as f64, m as f64, b as f64);
                let lg_want = nf.log2() + (k - 2) as f64 * bf.log2()
                    - k as f64 * (E * mf).log2()
                    - 1.0
                    - 2.0 * LOG2_E
                    - 2.0 * k as f64 / bf * (nf / bf).log2();
                assert!((got.log2() - lg_want).abs() < 1e-6, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn esp_lower_nonincreasing_in_t() {
        for (n, m, b) in [(10_000usize, 100usize, 10usize), (1 << 20, 1 << 10, 16), (4096, 64, 4)] {
            let p = params(n, m, b);
            let mut prev = f64::INFINITY;
            for t in (0..(20 * n / b) as u64).step_by(2 * (n / b) / 50 * 2 + 2) {
                let r = esp_lower_bound(&p, t).unwrap();
                assert!(r.value <= prev);
                prev = r.value;
            }
            assert_eq!(esp_lower_bound(&p, 1 << 50).unwrap().value, 0.0);
        }
    }

    #[test]
    fn upper_envelopes() {
        let p = params(10_000, 100, 10);
        assert!((easort_esp_upper(&p, 1).unwrap() - 2e6).abs() < 1e-3);
        let ee = easort_ee_upper(&p, 1).unwrap();
        assert!((ee.raw - 11_801.0).abs() < 1e-6);
        assert!(ee.clamped && ee.value == 10_000.0);
        assert!((easort_ee_upper(&p, 2).unwrap().value - 8300.0).abs() < 1e-6);
        // m^k = n b^(k-1) at k = 3
        assert_eq!(easort_ee_upper(&p, 3).unwrap().value, 0.0);
        // at m^k = n b^(k-1) the leading term is exactly n; past it the envelope drops below n
        assert!((easort_esp_upper(&p, 3).unwrap() - 10_100.0).abs() < 1e-6);
        assert!(easort_esp_upper(&p, 4).unwrap() <= 10_000.0);
        assert!(easort_esp_upper(&p, 0).is_err());
    }

    #[test]
    fn upper_envelopes_monotone_in_k() {
        for (n, m, b) in [(1usize << 30, 1usize << 10, 8usize), (1 << 40, 4096, 16), (1_000_000, 1000, 10)] {
            let p = params(n, m, b);
            for k in 1..8 {
                if m > b * b {
                    assert!(easort_esp_upper(&p, k + 1).unwrap() < easort_esp_upper(&p, k).unwrap());
                }
                assert!(easort_ee_upper(&p, k + 1).unwrap().value <= easort_ee_upper(&p, k).unwrap().value);
            }
        }
    }

    #[test]
    fn esp_envelope_matches_rationals() {
        for (n, m, b) in [(30u64, 8u64, 2u64), (25, 12, 3), (29, 10, 4)] {
            let p = params(n as usize, m as usize, b as usize);
            for k in 1..=3u32 {
                let big = |x: u64| BigRational::from_integer(BigUint::from(x).into());
                let pow = |x: u64, e: u32| big(x).pow(e as i32);
                let want = big(n * n) * pow(b, k - 1) / pow(m, k) + big(n * n) * pow(b, 2 * k) / pow(m, 2 * k);
                let got = easort_esp_upper(&p, k as usize).unwrap();
                assert!((got - rational_to_f64(&want)).abs() < 1e-9 * got);
            }
        }
    }

    #[test]
    fn no_overflow_at_large_n() {
        let p = params(1usize << 60, 1 << 20, 64);
        for t in [0u64, 2, 1 << 40, 1 << 56, 1 << 62] {
            assert!(code_size_upper_log2(&p, t).unwrap().is_finite());
            assert!(ee_lower_bound(&p, t).unwrap().value.is_finite());
            assert!(esp_lower_bound(&p, t).unwrap().value.is_finite());
        }
        for k in 1..5 {
            assert!(easort_esp_upper(&p, k).unwrap().is_finite());
            assert!(easort_ee_upper(&p, k).unwrap().value.is_finite());
        }
    }

    #[test]
    fn ball_bounds_small_values() {
        assert_eq!(ball_bound_errors(5, 2), BigUint::from(20u32));
        assert_eq!(ball_bound_ee(5, 2, 2), BigUint::from(160u32));
        assert_eq!(ball_bound_esp(4, 2, 1), BigUint::from(1280u32));
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(3, 10), BigUint::zero());
    }

    #[test]
    fn freq_sums_to_bucket_sample_pairs() {
        for (n, m, p) in [(24u64, 8u64, 2u64), (30, 12, 3), (40, 12, 4), (20, 6, 6), (16, 4, 1)] {
            let total: BigUint = (0..=n).map(|l| bucket_length_freq(n, m, p, l).unwrap()).sum();
            assert_eq!(total, BigUint::from(p) * binomial(n, m), "n={n} m={m} p={p}");
        }
        assert!(bucket_length_freq(24, 8, 3, 4).is_err());
    }

    #[test]
    fn exact_oracle_single_bucket_collapses() {
        // m = 7, b = 3 gives p = 1: the whole input is one shuffled bucket
        for n in [9usize, 12, 15] {
            let v = expected_bucket_distortion_exact(n, 7, 3, 1).unwrap();
            assert_eq!(v, avg_esp_random_exact(n, 3).unwrap());
        }
    }

    fn subsets(n: u64, m: u64, from: u64, acc: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if acc.len() as u64 == m {
            f(acc);
            return;
        }
        for x in from..=n {
            acc.push(x);
            subsets(n, m, x + 1, acc, f);
            acc.pop();
        }
    }

    #[test]
    fn exact_oracle_matches_subset_enumeration() {
        for (n, m, b) in [(12u64, 8u64, 2u64), (14, 9, 2), (13, 10, 3)] {
            let p = crate::easort::compute_bucket_count(m as usize, b as usize).unwrap() as u64;
            let blk = |x: u64| x.div_ceil(b) as i64;
            let mut total = BigRational::zero();
            let mut count = 0u64;
            subsets(n, m, 1, &mut Vec::new(), &mut |s| {
                count += 1;
                let mut uppers: Vec<u64> = (1..p).map(|i| s[(i * m / p - 1) as usize]).collect();
                uppers.push(n);
                let mut start = 1;
                for &u in &uppers {
                    let l = u + 1 - start;
                    let mut w = 0i64;
                    for x in start..=u {
                        for y in start..=u {
                            w += (blk(x) - blk(y)).abs();
                        }
                    }
                    total += BigRational::new(w.into(), (l as i64).into());
                    start = u + 1;
                }
            });
            let want = total / BigRational::from_integer((count as i64).into());
            let got = expected_bucket_distortion_exact(n as usize, m as usize, b as usize, 1).unwrap();
            assert_eq!(got, want, "n={n} m={m} b={b}");
        }
        assert!(expected_bucket_distortion_exact(61, 8, 2, 1).is_err());
        assert!(expected_bucket_distortion_exact(24, 8, 2, 2).is_err());
    }
}
