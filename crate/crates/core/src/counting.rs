//! Ordered representation counts `N = p₁² + … + p₅²` over a set of allowed
//! primes, exact and weighted.
//!
//! Exact tables come from a 5-fold self-convolution of the indicator of
//! allowed prime squares (square, square again, multiply once more) done
//! with number-theoretic transforms. Weighted tables use either a
//! floating-point FFT with an audited error bound, or exact big-integer
//! arithmetic over a common denominator for small ranges.

use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ntt;

/// Number of summands.
pub const PARTS: usize = 5;
pub const NMAX_LIMIT: u64 = 100_000_000;
pub const EXACT_WEIGHTED_LIMIT: u64 = 100_000;
pub const NAIVE_LIMIT: u64 = 1_000_000;

/// Weight per prime; primes absent from the map have weight 0.
pub type WeightMap = BTreeMap<u64, f64>;
pub type ExactWeightMap = BTreeMap<u64, BigRational>;

/// `counts[N]` = number of ordered 5-tuples of allowed primes with `Σ p_i² = N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepCountTable {
    nmax: u64,
    counts: Vec<u64>,
}

impl RepCountTable {
    pub fn nmax(&self) -> u64 {
        self.nmax
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, n: u64) -> u64 {
        self.counts.get(n as usize).copied().unwrap_or(0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            #[serde(rename = "N")]
            n: u64,
            count: u64,
        }
        write_rows(path, self.counts.iter().enumerate().map(|(n, &count)| Row { n: n as u64, count }))
    }

    /// Little-endian `u64` stream: `nmax` followed by `nmax + 1` counts.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut out = BufWriter::new(std::fs::File::create(path).map_err(io)?);
        out.write_all(&self.nmax.to_le_bytes()).map_err(io)?;
        for c in &self.counts {
            out.write_all(&c.to_le_bytes()).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut input = BufReader::new(std::fs::File::open(path).map_err(io)?);
        let mut word = [0u8; 8];
        input.read_exact(&mut word).map_err(io)?;
        let nmax = u64::from_le_bytes(word);
        if nmax > NMAX_LIMIT {
            return Err(Error::Parse { what: "count table header", input: nmax.to_string() });
        }
        let mut counts = Vec::with_capacity(nmax as usize + 1);
        for _ in 0..=nmax {
            input.read_exact(&mut word).map_err(io)?;
            counts.push(u64::from_le_bytes(word));
        }
        Ok(Self { nmax, counts })
    }
}

pub(crate) fn write_rows<R: Serialize>(path: &Path, rows: impl Iterator<Item = R>) -> Result<()> {
    let wrap = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn sorted_squares(allowed: &[u64], bound: u64) -> Vec<u64> {
    let mut sq: Vec<u64> = allowed.iter().filter(|&&p| p <= bound).map(|&p| p * p).filter(|&s| s <= bound).collect();
    sq.sort_unstable();
    sq.dedup();
    sq
}

/// Direct enumeration of ordered tuples; the oracle for [`count_range`].
pub fn count_naive(n: u64, allowed: &[u64]) -> u64 {
    assert!(n <= NAIVE_LIMIT, "count_naive is an oracle for N ≤ 10^6");
    let squares = sorted_squares(allowed, n);
    fn rec(rem: u64, depth: usize, squares: &[u64]) -> u64 {
        if depth == 1 {
            return squares.binary_search(&rem).is_ok() as u64;
        }
        let Some(&smallest) = squares.first() else { return 0 };
        let reserve = smallest * (depth as u64 - 1);
        let mut total = 0;
        for &s in squares {
            if s + reserve > rem {
                break;
            }
            total += rec(rem - s, depth - 1, squares);
        }
        total
    }
    rec(n, PARTS, &squares)
}

fn check_nmax(nmax: u64, limit: u64) -> Result<()> {
    if nmax == 0 || nmax > limit {
        return Err(Error::OutOfRange {
            what: "nmax",
            value: nmax.to_string(),
            range: if limit == EXACT_WEIGHTED_LIMIT { "1 ≤ nmax ≤ 10^5" } else { "1 ≤ nmax ≤ 10^8" },
        });
    }
    Ok(())
}

/// Exact table for every `N ≤ nmax`.
pub fn count_range(nmax: u64, allowed: &[u64]) -> Result<RepCountTable> {
    check_nmax(nmax, NMAX_LIMIT)?;
    let squares = sorted_squares(allowed, nmax);
    let keep = nmax as usize + 1;
    // Every entry of every partial power is at most n^5 (the total tuple count).
    let total = (squares.len() as u128).pow(PARTS as u32);
    if total >= ntt::MODULUS_PRODUCT || total > u64::MAX as u128 {
        return Err(Error::CapacityExceeded(format!("{} allowed squares give up to {total} tuples", squares.len())));
    }
    if squares.is_empty() {
        return Ok(RepCountTable { nmax, counts: vec![0; keep] });
    }
    let mut indicator = vec![0u64; keep];
    for &s in &squares {
        indicator[s as usize] = 1;
    }
    let two = ntt::convolve(&indicator, &indicator, keep);
    let four = ntt::convolve(&two, &two, keep);
    let counts = ntt::convolve(&four, &indicator, keep);
    Ok(RepCountTable { nmax, counts })
}

/// Floating-point weighted table; `err_bound` bounds `|values[N] − true|` for every `N`.
#[derive(Clone, Debug)]
pub struct WeightedRepTable {
    pub nmax: u64,
    pub values: Vec<f64>,
    pub err_bound: f64,
}

impl WeightedRepTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            #[serde(rename = "N")]
            n: u64,
            value: f64,
            err_bound: f64,
        }
        let err_bound = self.err_bound;
        write_rows(path, self.values.iter().enumerate().map(|(n, &value)| Row { n: n as u64, value, err_bound }))
    }
}

/// Vector with an entrywise absolute error bound.
struct Audited {
    v: Vec<f64>,
    err: f64,
}

impl Audited {
    fn norm1(&self) -> f64 {
        self.v.iter().map(|x| x.abs()).sum()
    }

    fn norm2(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn support(&self) -> f64 {
        self.v.iter().filter(|x| **x != 0.0).count() as f64
    }
}

struct FloatConvolver {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FloatConvolver {
    fn new(keep: usize) -> Self {
        let len = ntt::length_for(keep);
        let mut planner = FftPlanner::new();
        Self { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    fn spectrum(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, &x) in buf.iter_mut().zip(v) {
            b.re = x;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Rounding-error factor for one transform-based product of length `len`:
    /// `(1+ε)^{3n}(1+ε√5)^{3n+1}(1+β)^{3n} − 1` with `n = log₂ len`, times a
    /// safety factor for the mixed-radix kernels.
    fn rounding_factor(&self) -> f64 {
        let eps = f64::EPSILON / 2.0;
        let beta = 2.0 * f64::EPSILON;
        let n = self.len.trailing_zeros() as f64;
        let grow =
            (1.0 + eps).powf(3.0 * n) * (1.0 + eps * 5f64.sqrt()).powf(3.0 * n + 1.0) * (1.0 + beta).powf(3.0 * n);
        // (1+x)^k − 1 evaluated without cancellation
        let k_total = 3.0 * n * eps + (3.0 * n + 1.0) * eps * 5f64.sqrt() + 3.0 * n * beta;
        4.0 * (grow - 1.0).max(k_total * 1.01)
    }

    fn convolve(&self, x: &Audited, y: &Audited, keep: usize) -> Audited {
        let fx = self.spectrum(&x.v);
        let mut prod = if std::ptr::eq(x, y) {
            fx.iter().map(|a| a * a).collect::<Vec<_>>()
        } else {
            let fy = self.spectrum(&y.v);
            fx.iter().zip(&fy).map(|(a, b)| a * b).collect::<Vec<_>>()
        };
        self.inverse.process(&mut prod);
        let scale = 1.0 / self.len as f64;
        let v: Vec<f64> = prod[..keep].iter().map(|c| (c.re * scale).max(0.0)).collect();
        // |x̃*ỹ − x*y| ≤ ex·(‖ỹ‖₁ + ey·|supp y|) + ey·‖x̃‖₁, plus transform rounding.
        let propagated = x.err * (y.norm1() + y.err * y.support()) + y.err * x.norm1();
        let rounding = x.norm2() * y.norm2() * self.rounding_factor();
        Audited { v, err: propagated + rounding }
    }
}

fn check_weight(p: u64, w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::OutOfRange { what: "weight", value: format!("w({p}) = {w}"), range: "[0, 1]" });
    }
    Ok(())
}

/// `values[N] = Σ Π w(p_i)` over ordered tuples with `Σ p_i² = N`, with an audited
/// error bound. Fails with `AuditFailure` when the bound exceeds `tol`.
pub fn weighted_count_range(nmax: u64, weights: &WeightMap, tol: Option<f64>) -> Result<WeightedRepTable> {
    check_nmax(nmax, NMAX_LIMIT)?;
    let keep = nmax as usize + 1;
    let mut base = vec![0.0f64; keep];
    for (&p, &w) in weights {
        check_weight(p, w)?;
        if p.checked_mul(p).is_some_and(|s| s <= nmax) {
            base[(p * p) as usize] = w;
        }
    }
    let conv = FloatConvolver::new(keep);
    let one = Audited { v: base, err: 0.0 };
    let two = conv.convolve(&one, &one, keep);
    let four = conv.convolve(&two, &two, keep);
    let five = conv.convolve(&four, &one, keep);
    if let Some(tol) = tol {
        if five.err > tol {
            return Err(Error::AuditFailure { bound: five.err, tol });
        }
    }
    Ok(WeightedRepTable { nmax, values: five.v, err_bound: five.err })
}

/// Exact weighted table: `values[N] = numerators[N] / denominator`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactWeightedTable {
    pub nmax: u64,
    pub denominator: BigInt,
    pub numerators: Vec<BigInt>,
}

impl ExactWeightedTable {
    pub fn value(&self, n: u64) -> BigRational {
        BigRational::new(self.numerators[n as usize].clone(), self.denominator.clone())
    }

    pub fn to_f64(&self, n: u64) -> f64 {
        self.value(n).to_f64().unwrap_or(f64::NAN)
    }

    /// Exact `values[N]` vs an integer.
    pub fn cmp_integer(&self, n: u64, k: u64) -> std::cmp::Ordering {
        self.numerators[n as usize].cmp(&(&self.denominator * k))
    }
}

/// Exact rational weighted counts for `nmax ≤ 10⁵`.
pub fn weighted_count_exact(nmax: u64, weights: &ExactWeightMap) -> Result<ExactWeightedTable> {
    check_nmax(nmax, EXACT_WEIGHTED_LIMIT)?;
    let keep = nmax as usize + 1;
    for (&p, w) in weights {
        if w.is_negative() || w > &BigRational::one() {
            return Err(Error::OutOfRange { what: "weight", value: format!("w({p}) = {w}"), range: "[0, 1]" });
        }
    }
    let common = weights.values().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let base: Vec<(usize, BigInt)> = weights
        .iter()
        .filter(|(&p, w)| !w.is_zero() && p.checked_mul(p).is_some_and(|s| s <= nmax))
        .map(|(&p, w)| ((p * p) as usize, w.numer() * (&common / w.denom())))
        .collect();

    let mut two = vec![BigInt::zero(); keep];
    for (i, wi) in &base {
        for (j, wj) in &base {
            if i + j < keep {
                two[i + j] += wi * wj;
            }
        }
    }
    let support: Vec<usize> = (0..keep).filter(|&i| !two[i].is_zero()).collect();
    let four: Vec<BigInt> = (0..keep)
        .into_par_iter()
        .map(|n| {
            let mut acc = BigInt::zero();
            for &i in support.iter().take_while(|&&i| i <= n) {
                let j = n - i;
                if !two[j].is_zero() {
                    acc += &two[i] * &two[j];
                }
            }
            acc
        })
        .collect();
    let numerators: Vec<BigInt> = (0..keep)
        .into_par_iter()
        .map(|n| {
            let mut acc = BigInt::zero();
            for (s, w) in &base {
                if *s <= n && !four[n - s].is_zero() {
                    acc += &four[n - s] * w;
                }
            }
            acc
        })
        .collect();
    Ok(ExactWeightedTable { nmax, denominator: common.pow(PARTS as u32), numerators })
}
