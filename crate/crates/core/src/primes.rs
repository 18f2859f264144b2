//! Prime tables and the special-prime filter `a < {η·p^e} < b`.

use std::fmt;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::diophantine::{window_test, QuadraticIrrational};
use crate::error::{Error, Result};

pub const SIEVE_MAX: u64 = 1_000_000_000;
const SEGMENTED_ABOVE: u64 = 100_000_000;
/// Odd numbers per segment (a 256 KiB bitset slice).
const SEGMENT_WORDS: usize = 1 << 15;

/// Open interval `(a, b)` with rational endpoints, `0 < a < b < 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    a: BigRational,
    b: BigRational,
}

impl Window {
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        if !(a > BigRational::zero() && a < b && b < BigRational::one()) {
            return Err(Error::InvalidWindow(format!("need 0 < a < b < 1, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn from_ratios(a: (i64, i64), b: (i64, i64)) -> Result<Self> {
        if a.1 == 0 || b.1 == 0 {
            return Err(Error::ZeroDenominator);
        }
        Self::new(BigRational::new(a.0.into(), a.1.into()), BigRational::new(b.0.into(), b.1.into()))
    }

    /// Parses `a_num/a_den,b_num/b_den`.
    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// `b − a`, the density μ of the filtered primes.
    pub fn length(&self) -> BigRational {
        &self.b - &self.a
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
    }

    pub fn b_f64(&self) -> f64 {
        self.b.to_f64().unwrap_or(f64::NAN)
    }

    pub fn length_f64(&self) -> f64 {
        self.length().to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        x > &self.a && x < &self.b
    }
}

fn parse_ratio(s: &str) -> Option<BigRational> {
    let (n, d) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { what: "window a_num/a_den,b_num/b_den", input: s.to_string() };
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let a = parse_ratio(a).ok_or_else(bad)?;
        let b = parse_ratio(b).ok_or_else(bad)?;
        Self::new(a, b)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{},{}/{}", self.a.numer(), self.a.denom(), self.b.numer(), self.b.denom())
    }
}

/// All primes up to `limit`, with an odd-only membership bitset.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    // bit i set <=> 2i + 1 is prime
    odd_bits: Vec<u64>,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit || n < 2 {
            return false;
        }
        if n.is_multiple_of(2) {
            return n == 2;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Primes `p ≤ bound`.
    pub fn primes_up_to(&self, bound: u64) -> &[u64] {
        let end = self.primes.partition_point(|&p| p <= bound);
        &self.primes[..end]
    }
}

/// Sieve of Eratosthenes over `[2, limit]`, segmented and parallel above 10⁸.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if !(2..=SIEVE_MAX).contains(&limit) {
        return Err(Error::OutOfRange { what: "sieve limit", value: limit.to_string(), range: "2 ≤ limit ≤ 10^9" });
    }
    let odd_bits = if limit > SEGMENTED_ABOVE { odd_bitset_segmented(limit) } else { odd_bitset_plain(limit) };
    Ok(table_from_bits(limit, odd_bits))
}

fn words_for(limit: u64) -> usize {
    (limit / 2) as usize / 64 + 1
}

fn odd_bitset_plain(limit: u64) -> Vec<u64> {
    let odd_count = (limit / 2) as usize + 1;
    let mut bits = vec![!0u64; words_for(limit)];
    clear_bit(&mut bits, 0);
    let mut p = 3u64;
    while p * p <= limit {
        let i = (p / 2) as usize;
        if bits[i / 64] >> (i % 64) & 1 == 1 {
            let mut j = (p * p / 2) as usize;
            while j < odd_count {
                clear_bit(&mut bits, j);
                j += p as usize;
            }
        }
        p += 2;
    }
    trim_tail(&mut bits, limit);
    bits
}

fn odd_bitset_segmented(limit: u64) -> Vec<u64> {
    let root = limit.sqrt();
    let base = table_from_bits(root.max(2), odd_bitset_plain(root.max(2)));
    let base_odd: Vec<u64> = base.primes.iter().copied().filter(|&p| p > 2).collect();
    let mut bits = vec![!0u64; words_for(limit)];
    bits.par_chunks_mut(SEGMENT_WORDS).enumerate().for_each(|(seg, chunk)| {
        // chunk covers odd indices [lo, lo + 64·len)
        let lo = (seg * SEGMENT_WORDS * 64) as u64;
        let hi = lo + (chunk.len() * 64) as u64;
        for &p in &base_odd {
            // first odd multiple m ≥ max(p², 2lo+1), as index m/2
            let start = (p * p).max(2 * lo + 1);
            let mut m = start.div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
            let mut j = m / 2;
            while j < hi {
                let k = (j - lo) as usize;
                chunk[k / 64] &= !(1u64 << (k % 64));
                j += p;
            }
        }
    });
    clear_bit(&mut bits, 0);
    trim_tail(&mut bits, limit);
    bits
}

fn clear_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] &= !(1u64 << (i % 64));
}

fn trim_tail(bits: &mut [u64], limit: u64) {
    let last = (limit.saturating_sub(1) / 2) as usize; // largest odd ≤ limit
    let used = last + 1;
    let word = used / 64;
    if word < bits.len() {
        bits[word] &= (1u64 << (used % 64)) - 1;
        for w in &mut bits[word + 1..] {
            *w = 0;
        }
    }
}

fn table_from_bits(limit: u64, odd_bits: Vec<u64>) -> PrimeTable {
    let mut primes = Vec::new();
    if limit >= 2 {
        primes.push(2);
    }
    for (w, &word) in odd_bits.iter().enumerate() {
        let mut rest = word;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            primes.push(2 * (w * 64 + b) as u64 + 1);
            rest &= rest - 1;
        }
    }
    PrimeTable { limit, odd_bits, primes }
}

/// Exponent applied to `p` before the fractional-part filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterExponent {
    /// `{η·p}`
    Linear = 1,
    /// `{η·p²}`
    Square = 2,
}

impl FilterExponent {
    pub fn from_u32(e: u32) -> Result<Self> {
        match e {
            1 => Ok(Self::Linear),
            2 => Ok(Self::Square),
            _ => Err(Error::OutOfRange { what: "exponent", value: e.to_string(), range: "1 or 2" }),
        }
    }

    pub fn apply(self, p: u64) -> u64 {
        match self {
            Self::Linear => p,
            Self::Square => p * p,
        }
    }
}

/// Primes `p ≤ limit` with `a < {η·p^e} < b`.
#[derive(Clone, Debug)]
pub struct SpecialPrimeSet {
    pub limit: u64,
    pub source_count: usize,
    pub eta: QuadraticIrrational,
    pub window: Window,
    pub exponent: FilterExponent,
    pub members: Vec<u64>,
}

pub fn special_primes(
    table: &PrimeTable,
    eta: &QuadraticIrrational,
    window: &Window,
    exponent: FilterExponent,
) -> SpecialPrimeSet {
    let members = table.primes().par_iter().copied().filter(|&p| window_test(eta, exponent.apply(p), window)).collect();
    SpecialPrimeSet {
        limit: table.limit(),
        source_count: table.len(),
        eta: eta.clone(),
        window: window.clone(),
        exponent,
        members,
    }
}

impl SpecialPrimeSet {
    /// Members `p ≤ bound`.
    pub fn members_up_to(&self, bound: u64) -> &[u64] {
        let end = self.members.partition_point(|&p| p <= bound);
        &self.members[..end]
    }

    /// Writes one decimal member per line.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let file = std::fs::File::create(path).map_err(io)?;
        let mut out = BufWriter::new(file);
        for p in &self.members {
            writeln!(out, "{p}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// `|members| / π(limit)`.
pub fn density_estimate(set: &SpecialPrimeSet) -> f64 {
    if set.source_count == 0 {
        return 0.0;
    }
    set.members.len() as f64 / set.source_count as f64
}
