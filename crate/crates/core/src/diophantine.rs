//! Exact arithmetic for real quadratic irrationals.
//!
//! A [`QuadraticIrrational`] is held in the form `(P ± √D)/Q` with integer
//! `P`, non-square `D > 0` and `Q > 0`. Everything here is done with integer
//! square roots of scaled radicands, so fractional parts come with a
//! certified error and window membership is decided exactly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::Window;

const COEFF_LIMIT: i64 = 1 << 31;

/// The real number `(p_num + radical_sign·√d_rad) / q_den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    p_num: i64,
    d_rad: u64,
    q_den: u64,
    negative_radical: bool,
}

impl QuadraticIrrational {
    /// Builds `(p + √d)/q`. A negative `q` is absorbed by flipping the sign
    /// of both `p` and the radical.
    pub fn new(p: i64, d: u64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroDenominator);
        }
        if d == 0 {
            return Err(Error::ZeroRadicand);
        }
        check_range("P", p.unsigned_abs() as i128)?;
        check_range("D", d as i128)?;
        check_range("Q", q.unsigned_abs() as i128)?;
        let root = d.sqrt();
        if root * root == d {
            return Err(Error::PerfectSquare(d));
        }
        Ok(if q > 0 {
            Self { p_num: p, d_rad: d, q_den: q as u64, negative_radical: false }
        } else {
            Self { p_num: -p, d_rad: d, q_den: q.unsigned_abs(), negative_radical: true }
        })
    }

    /// `√d`.
    pub fn sqrt(d: u64) -> Result<Self> {
        Self::new(0, d, 1)
    }

    pub fn p_num(&self) -> i64 {
        self.p_num
    }

    pub fn d_rad(&self) -> u64 {
        self.d_rad
    }

    pub fn q_den(&self) -> u64 {
        self.q_den
    }

    pub fn negative_radical(&self) -> bool {
        self.negative_radical
    }

    /// `-self`, i.e. `(-P ∓ √D)/Q`.
    pub fn negated(&self) -> Self {
        Self { p_num: -self.p_num, negative_radical: !self.negative_radical, ..self.clone() }
    }

    fn radical_sign(&self) -> Sign {
        if self.negative_radical {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn to_f64(&self) -> f64 {
        let r = (self.d_rad as f64).sqrt();
        let r = if self.negative_radical { -r } else { r };
        (self.p_num as f64 + r) / self.q_den as f64
    }

    /// `self · n` as a surd `(A + s·√R)/q` with `R = D n²`.
    fn times(&self, n: &BigInt) -> Surd {
        let mut sign = self.radical_sign();
        if n.is_negative() {
            sign = -sign;
        }
        Surd { a: n * self.p_num, sign, r: n * n * self.d_rad, q: BigInt::from(self.q_den) }
    }
}

fn check_range(what: &'static str, v: i128) -> Result<()> {
    if v >= COEFF_LIMIT as i128 {
        return Err(Error::OutOfRange { what, value: v.to_string(), range: "|value| < 2^31" });
    }
    Ok(())
}

impl fmt::Display for QuadraticIrrational {
    /// Serializes as `P,D,Q`; a negated radical is written with a negative `Q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative_radical {
            write!(f, "{},{},-{}", -self.p_num, self.d_rad, self.q_den)
        } else {
            write!(f, "{},{},{}", self.p_num, self.d_rad, self.q_den)
        }
    }
}

impl FromStr for QuadraticIrrational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { what: "quadratic irrational P,D,Q", input: s.to_string() };
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let p = parts[0].parse::<i64>().map_err(|_| bad())?;
        let d = parts[1].parse::<u64>().map_err(|_| bad())?;
        let q = parts[2].parse::<i64>().map_err(|_| bad())?;
        Self::new(p, d, q)
    }
}

/// `(a + sign·√r) / q` with `q > 0` and `r` not a perfect square.
struct Surd {
    a: BigInt,
    sign: Sign,
    r: BigInt,
    q: BigInt,
}

impl Surd {
    fn scale_pow2(mut self, bits: u32) -> Self {
        self.a <<= bits as usize;
        self.r <<= 2 * bits as usize;
        self
    }

    fn floor(&self) -> BigInt {
        floor_surd(&self.a, self.sign, &self.r, &self.q)
    }

    /// Exact decision of `self > x` for rational `x`.
    fn gt_rational(&self, x: &BigRational) -> bool {
        // (a + s√r)/q > n/d  <=>  s·d·√r > q·n − d·a
        let (n, d) = (x.numer(), x.denom());
        let t = &self.q * n - d * &self.a;
        signed_surd_gt(self.sign, d, &self.r, &t)
    }
}

/// `floor((a + sign·√r)/q)` for `q > 0` and non-square `r ≥ 0`.
fn floor_surd(a: &BigInt, sign: Sign, r: &BigInt, q: &BigInt) -> BigInt {
    let b = r.sqrt();
    let num = match sign {
        Sign::Minus if !r.is_zero() => a - &b - 1,
        Sign::Minus => a.clone(),
        _ => a + &b,
    };
    num.div_floor(q)
}

/// Decides `sign·c·√r > t` for `c > 0`, `r` not a perfect square.
fn signed_surd_gt(sign: Sign, c: &BigInt, r: &BigInt, t: &BigInt) -> bool {
    let lhs = c * c * r;
    let rhs = t * t;
    match sign {
        Sign::Minus => t.is_negative() && lhs < rhs,
        _ => t.is_negative() || lhs > rhs,
    }
}

/// A dyadic real `mantissa / 2^frac_bits` whose true value is certified to
/// lie within `± 2^-err_bits`. `err_bits == None` marks an exact value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPointReal {
    mantissa: BigInt,
    frac_bits: u32,
    err_bits: Option<i64>,
}

impl FixedPointReal {
    pub fn new(mantissa: BigInt, frac_bits: u32, err_bits: Option<i64>) -> Self {
        if let Some(e) = err_bits {
            assert!(e <= frac_bits as i64, "err_bits must not exceed frac_bits");
        }
        Self { mantissa, frac_bits, err_bits }
    }

    pub fn exact_integer(n: i64) -> Self {
        Self::new(BigInt::from(n), 0, None)
    }

    /// The exact dyadic value of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value");
        if x == 0.0 {
            return Self::exact_integer(0);
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let mut m = BigInt::from(mant);
        if x < 0.0 {
            m = -m;
        }
        if e >= 0 {
            Self::new(m << e as usize, 0, None)
        } else {
            Self::new(m, (-e) as u32, None).normalized()
        }
    }

    /// Floor-rounds a rational to `frac_bits` fractional bits.
    pub fn from_rational(x: &BigRational, frac_bits: u32) -> Self {
        let scaled = x.numer() << frac_bits as usize;
        let (m, rem) = scaled.div_mod_floor(x.denom());
        let err = if rem.is_zero() { None } else { Some(frac_bits as i64) };
        Self::new(m, frac_bits, err)
    }

    fn normalized(mut self) -> Self {
        if self.err_bits.is_none() {
            while self.frac_bits > 0 && self.mantissa.is_even() && !self.mantissa.is_zero() {
                self.mantissa >>= 1;
                self.frac_bits -= 1;
            }
            if self.mantissa.is_zero() {
                self.frac_bits = 0;
            }
        }
        self
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn err_bits(&self) -> Option<i64> {
        self.err_bits
    }

    pub fn is_exact(&self) -> bool {
        self.err_bits.is_none()
    }

    /// Number of certified fractional bits; `i64::MAX` for exact values.
    pub fn certified_bits(&self) -> i64 {
        self.err_bits.unwrap_or(i64::MAX)
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.frac_bits as usize)
    }

    /// Upper bound on `|true − value|`.
    pub fn error_bound(&self) -> BigRational {
        match self.err_bits {
            None => BigRational::zero(),
            Some(e) if e >= 0 => BigRational::new(BigInt::one(), BigInt::one() << e as usize),
            Some(e) => BigRational::from_integer(BigInt::one() << (-e) as usize),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.mantissa.bits().saturating_sub(62);
        let top = (&self.mantissa >> shift as usize).to_f64().unwrap_or(0.0);
        top * 2f64.powi(shift as i32 - self.frac_bits as i32)
    }

    fn with_frac_bits(&self, bits: u32) -> BigInt {
        debug_assert!(bits >= self.frac_bits);
        &self.mantissa << (bits - self.frac_bits) as usize
    }

    /// Sum with conservative error propagation: two inexact terms lose one bit.
    pub fn add(&self, other: &Self) -> Self {
        let bits = self.frac_bits.max(other.frac_bits);
        let mantissa = self.with_frac_bits(bits) + other.with_frac_bits(bits);
        let err_bits = match (self.err_bits, other.err_bits) {
            (None, e) | (e, None) => e,
            (Some(a), Some(b)) => Some(a.min(b) - 1),
        };
        Self::new(mantissa, bits, err_bits).normalized()
    }

    pub fn neg(&self) -> Self {
        Self { mantissa: -&self.mantissa, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Splits off `floor(value)`, leaving a mantissa in `[0, 2^frac_bits)`.
    /// The true fractional part may wrap near 0 or 1 when inexact; the
    /// returned representative still satisfies the error bound modulo 1.
    pub fn frac(&self) -> Self {
        let one = BigInt::one() << self.frac_bits as usize;
        Self { mantissa: self.mantissa.mod_floor(&one), ..self.clone() }
    }

    pub fn floor(&self) -> BigInt {
        self.mantissa.div_floor(&(BigInt::one() << self.frac_bits as usize))
    }
}

impl fmt::Display for FixedPointReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// `η·n` as a fixed-point real with `frac_bits` fractional bits, not reduced mod 1.
pub fn scaled_multiple(eta: &QuadraticIrrational, n: &BigInt, frac_bits: u32) -> FixedPointReal {
    if n.is_zero() {
        return FixedPointReal::exact_integer(0);
    }
    let x = eta.times(n).scale_pow2(frac_bits).floor();
    FixedPointReal::new(x, frac_bits, Some(frac_bits as i64))
}

/// `{η·n}` with certified error `< 2^-frac_bits`.
pub fn frac_part(eta: &QuadraticIrrational, n: u64, frac_bits: u32) -> FixedPointReal {
    scaled_multiple(eta, &BigInt::from(n), frac_bits).frac()
}

/// Exact decision of `a < {η·n} < b`.
pub fn window_test(eta: &QuadraticIrrational, n: u64, w: &Window) -> bool {
    let s = eta.times(&BigInt::from(n));
    let f = BigRational::from_integer(s.floor());
    s.gt_rational(&(&f + w.a())) && !s.gt_rational(&(&f + w.b()))
}

/// Eventually periodic simple continued fraction `[a0; preperiod, (period)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub a0: i64,
    pub preperiod: Vec<u64>,
    pub period: Vec<u64>,
}

impl ContinuedFraction {
    /// Partial quotients `a0, a1, a2, ...` repeating the period forever.
    pub fn terms(&self) -> impl Iterator<Item = BigInt> + '_ {
        std::iter::once(BigInt::from(self.a0))
            .chain(self.preperiod.iter().map(|&a| BigInt::from(a)))
            .chain(self.period.iter().cycle().map(|&a| BigInt::from(a)))
    }
}

/// Expansion by the integer `(P, Q)` recurrence; terminates by Lagrange's theorem.
pub fn continued_fraction(eta: &QuadraticIrrational) -> ContinuedFraction {
    // Bring the value to (p + √d)/q with q | d − p², q possibly negative.
    let (mut p, mut q) = if eta.negative_radical {
        (-(eta.p_num as i128), -(eta.q_den as i128))
    } else {
        (eta.p_num as i128, eta.q_den as i128)
    };
    let mut d = eta.d_rad as i128;
    if (d - p * p) % q != 0 {
        let aq = q.abs();
        p *= aq;
        d *= aq * aq;
        q *= aq;
    }
    let root = (d as u128).sqrt() as i128;
    let floor_term = |p: i128, q: i128| -> i128 {
        if q > 0 {
            (p + root).div_euclid(q)
        } else {
            (-p - root - 1).div_euclid(-q)
        }
    };

    let a0 = floor_term(p, q);
    let mut quotients: Vec<u64> = Vec::new();
    let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
    let mut a = a0;
    loop {
        let next_p = a * q - p;
        let next_q = (d - next_p * next_p) / q;
        p = next_p;
        q = next_q;
        if let Some(&start) = seen.get(&(p, q)) {
            return ContinuedFraction {
                a0: a0 as i64,
                preperiod: quotients[..start].to_vec(),
                period: quotients[start..].to_vec(),
            };
        }
        seen.insert((p, q), quotients.len());
        a = floor_term(p, q);
        quotients.push(a as u64);
    }
}

/// Convergents `h_i/k_i` built from a stream of partial quotients.
pub(crate) struct Convergents<I> {
    terms: I,
    h: (BigInt, BigInt),
    k: (BigInt, BigInt),
}

impl<I: Iterator<Item = BigInt>> Convergents<I> {
    pub(crate) fn new(terms: I) -> Self {
        Self { terms, h: (BigInt::zero(), BigInt::one()), k: (BigInt::one(), BigInt::zero()) }
    }
}

impl<I: Iterator<Item = BigInt>> Iterator for Convergents<I> {
    type Item = (BigInt, BigInt);

    fn next(&mut self) -> Option<Self::Item> {
        let a = self.terms.next()?;
        let h = &a * &self.h.1 + &self.h.0;
        let k = &a * &self.k.1 + &self.k.0;
        self.h = (std::mem::replace(&mut self.h.1, h.clone()), h.clone());
        self.k = (std::mem::replace(&mut self.k.1, k.clone()), k.clone());
        Some((h, k))
    }
}

/// The first `count` convergents of η.
pub fn convergents(eta: &QuadraticIrrational, count: usize) -> Vec<(BigInt, BigInt)> {
    let cf = continued_fraction(eta);
    Convergents::new(cf.terms()).take(count).collect()
}

/// Partial quotients of a rational number (terminating Euclid expansion).
pub(crate) fn rational_terms(x: &BigRational) -> Vec<BigInt> {
    let mut terms = Vec::new();
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    while !d.is_zero() {
        let (a, r) = n.div_mod_floor(&d);
        terms.push(a);
        n = std::mem::replace(&mut d, r);
    }
    terms
}

/// `d/q` with `gcd(d, q) = 1` and certified `|t − d/q| ≤ err_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalApprox {
    pub d: BigInt,
    pub q: u64,
    pub err_bound: f64,
}

impl RationalApprox {
    pub fn as_rational(&self) -> BigRational {
        BigRational::new(self.d.clone(), BigInt::from(self.q))
    }
}

/// Dirichlet approximation: `d/q` with `1 ≤ q ≤ tau` and `|t − d/q| ≤ 1/(q·tau)`,
/// taken as the last continued-fraction convergent of `t` with denominator
/// at most `tau`.
pub fn dirichlet_approx(t: &FixedPointReal, tau: u64) -> Result<RationalApprox> {
    if tau == 0 {
        return Err(Error::OutOfRange { what: "tau", value: "0".into(), range: "tau ≥ 1" });
    }
    let needed = 2 * (64 - tau.leading_zeros()) as i64 + 16;
    if t.certified_bits() < needed {
        return Err(Error::InsufficientPrecision(format!(
            "t is certified to {} bits, Dirichlet approximation with tau = {tau} needs {needed}",
            t.certified_bits()
        )));
    }

    let v = t.value();
    let tau_big = BigInt::from(tau);
    let mut best: Option<(BigInt, BigInt)> = None;
    for (h, k) in Convergents::new(rational_terms(&v).into_iter()) {
        if k > tau_big {
            break;
        }
        best = Some((h, k));
    }
    // The zeroth convergent has denominator 1, so `best` is always set.
    let (d, q) = best.expect("first convergent has q = 1");
    let approx = BigRational::new(d.clone(), q.clone());
    let dev = (&v - &approx).abs() + t.error_bound();
    let limit = BigRational::new(BigInt::one(), &q * &tau_big);
    if dev > limit {
        return Err(Error::InsufficientPrecision(format!(
            "certified error of t leaves |t - {d}/{q}| ≤ 1/(q·tau) undecided"
        )));
    }
    let err_bound = round_up_f64(&dev);
    Ok(RationalApprox { d, q: q.to_u64().expect("q ≤ tau"), err_bound })
}

/// Smallest convenient f64 that is ≥ the rational `x ≥ 0`.
pub(crate) fn round_up_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let approx = x.to_f64().unwrap_or(f64::INFINITY);
    let bumped = approx * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
    debug_assert!(BigRational::from_float(bumped).is_none_or(|b| &b >= x));
    bumped
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn frac_oracle(d: u64, n: u64, bits: u32) -> f64 {
        // {n√d} from isqrt(d·n²·4^bits), independent of the surd machinery.
        let r = (BigInt::from(d) * n * n) << (2 * bits as usize);
        let s = r.sqrt();
        let one = BigInt::one() << bits as usize;
        let frac = s.mod_floor(&one);
        frac.to_f64().unwrap() / 2f64.powi(bits as i32)
    }

    #[test]
    fn construction() {
        let sqrt2 = QuadraticIrrational::new(0, 2, 1).unwrap();
        assert!((sqrt2.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        let phi = QuadraticIrrational::new(1, 5, 2).unwrap();
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
        assert!(matches!(QuadraticIrrational::new(0, 4, 1), Err(Error::PerfectSquare(4))));
        assert!(matches!(QuadraticIrrational::new(1, 2, 0), Err(Error::ZeroDenominator)));
        let neg = QuadraticIrrational::new(1, 2, -3).unwrap();
        assert!(neg.q_den() == 3 && neg.negative_radical());
        assert!((neg.to_f64() - (1.0 + 2f64.sqrt()) / -3.0).abs() < 1e-15);
    }

    #[test]
    fn parse_and_display() {
        let eta: QuadraticIrrational = "0,2,1".parse().unwrap();
        assert_eq!(eta, QuadraticIrrational::sqrt(2).unwrap());
        assert_eq!(eta.to_string(), "0,2,1");
        let neg: QuadraticIrrational = "1,2,-3".parse().unwrap();
        assert_eq!(neg.to_string().parse::<QuadraticIrrational>().unwrap(), neg);
        assert!("1,2".parse::<QuadraticIrrational>().is_err());
    }

    #[test]
    fn classical_expansions() {
        let cf = continued_fraction(&QuadraticIrrational::sqrt(2).unwrap());
        assert_eq!((cf.a0, cf.preperiod.clone(), cf.period.clone()), (1, vec![], vec![2]));
        let cf = continued_fraction(&QuadraticIrrational::new(1, 5, 2).unwrap());
        assert_eq!((cf.a0, cf.period.clone()), (1, vec![1]));
        let cf = continued_fraction(&QuadraticIrrational::sqrt(3).unwrap());
        assert_eq!((cf.a0, cf.period.clone()), (1, vec![1, 2]));
        // (1 + √2)/3 ≈ 0.8047 needs the Q | D − P² normalization.
        let eta = QuadraticIrrational::new(1, 2, 3).unwrap();
        let cf = continued_fraction(&eta);
        let value: f64 = {
            let terms: Vec<f64> = cf.terms().take(30).map(|a| a.to_f64().unwrap()).collect();
            terms.iter().rev().skip(1).fold(*terms.last().unwrap(), |acc, a| a + 1.0 / acc)
        };
        assert!((value - eta.to_f64()).abs() < 1e-12);
        assert!(!cf.period.is_empty());
    }

    #[test]
    fn negative_values_expand() {
        let eta = QuadraticIrrational::sqrt(7).unwrap().negated();
        let cf = continued_fraction(&eta);
        assert_eq!(cf.a0, -3);
        let (h, k) = convergents(&eta, 30).pop().unwrap();
        let approx = h.to_f64().unwrap() / k.to_f64().unwrap();
        assert!((approx + 7f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn classical_convergents() {
        let pairs = |v: &[(i64, i64)]| v.iter().map(|&(h, k)| (big(h), big(k))).collect::<Vec<_>>();
        assert_eq!(
            convergents(&QuadraticIrrational::sqrt(2).unwrap(), 5),
            pairs(&[(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)])
        );
        assert_eq!(
            convergents(&QuadraticIrrational::new(1, 5, 2).unwrap(), 4),
            pairs(&[(1, 1), (2, 1), (3, 2), (5, 3)])
        );
        assert_eq!(convergents(&QuadraticIrrational::sqrt(3).unwrap(), 3), pairs(&[(1, 1), (2, 1), (5, 3)]));
    }

    #[test]
    fn convergent_error_bound() {
        for eta in [
            QuadraticIrrational::sqrt(2).unwrap(),
            QuadraticIrrational::new(3, 13, 7).unwrap(),
            QuadraticIrrational::new(-2, 11, 5).unwrap(),
        ] {
            let cs = convergents(&eta, 25);
            let exact = scaled_multiple(&eta, &BigInt::one(), 400).value();
            for w in cs.windows(2) {
                let (h, k) = &w[0];
                let bound = BigRational::new(BigInt::one(), &w[0].1 * &w[1].1);
                let dev = (&exact - BigRational::new(h.clone(), k.clone())).abs();
                assert!(dev < bound);
            }
        }
    }

    #[test]
    fn fractional_parts() {
        let sqrt2 = QuadraticIrrational::sqrt(2).unwrap();
        let phi = QuadraticIrrational::new(1, 5, 2).unwrap();
        let f = frac_part(&sqrt2, 9, 64);
        assert_eq!(f.err_bits(), Some(64));
        assert!((f.to_f64() - frac_oracle(2, 9, 128)).abs() < 1e-15);
        assert!((f.to_f64() - 0.7279220613578552).abs() < 1e-15);
        assert!((frac_part(&phi, 1, 64).to_f64() - 0.6180339887498949).abs() < 1e-15);
        assert!((frac_part(&sqrt2, 2, 64).to_f64() - frac_oracle(2, 2, 128)).abs() < 1e-15);
        assert!((frac_part(&sqrt2, 2, 64).to_f64() - 0.8284271247461903).abs() < 1e-15);
    }

    #[test]
    fn mirror_fractional_parts_sum_to_one() {
        let eta = QuadraticIrrational::new(1, 5, 2).unwrap();
        let neg = eta.negated();
        for n in 1..200u64 {
            let s = frac_part(&eta, n, 80).add(&frac_part(&neg, n, 80));
            // Both are floor-rounded, so the sum sits in (1 − 2^-79, 1].
            let dev = (s.value() - BigRational::one()).abs();
            assert!(dev <= BigRational::new(BigInt::one(), BigInt::one() << 79));
        }
    }

    #[test]
    fn window_examples() {
        let sqrt2 = QuadraticIrrational::sqrt(2).unwrap();
        let w = Window::parse("7/10,3/4").unwrap();
        assert!(window_test(&sqrt2, 9, &w));
        assert!(!window_test(&sqrt2, 4, &w));
        let w = Window::parse("73/100,3/4").unwrap();
        assert!(!window_test(&sqrt2, 9, &w));
    }

    #[test]
    fn window_test_with_negated_radical() {
        let eta = QuadraticIrrational::new(2, 3, -5).unwrap();
        let w = Window::parse("1/3,5/7").unwrap();
        for n in 1..2000u64 {
            let f = frac_part(&eta, n, 100).to_f64();
            assert_eq!(window_test(&eta, n, &w), f > 1.0 / 3.0 && f < 5.0 / 7.0, "n = {n}");
        }
    }

    #[test]
    fn dirichlet_examples() {
        let half = FixedPointReal::from_f64(0.5);
        let a = dirichlet_approx(&half, 10).unwrap();
        assert_eq!((a.d.clone(), a.q, a.err_bound), (big(1), 2, 0.0));

        let pi_frac = FixedPointReal::from_f64(std::f64::consts::PI - 3.0);
        let a = dirichlet_approx(&pi_frac, 100).unwrap();
        assert_eq!((a.d.clone(), a.q), (big(1), 7));
        assert!(a.err_bound <= 1.0 / 700.0 && (a.err_bound - 0.00126).abs() < 1e-5);

        let t = scaled_multiple(&QuadraticIrrational::sqrt(2).unwrap(), &BigInt::one(), 96)
            .sub(&FixedPointReal::exact_integer(1));
        let a = dirichlet_approx(&t, 30).unwrap();
        assert_eq!((a.d.clone(), a.q), (big(12), 29));
        assert!(a.err_bound <= 1.0 / 870.0);
    }

    #[test]
    fn dirichlet_rejects_thin_input() {
        let t = FixedPointReal::new(big(3), 4, Some(4));
        assert!(matches!(dirichlet_approx(&t, 1000), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn fixed_point_arithmetic() {
        let a = FixedPointReal::from_rational(&BigRational::new(big(1), big(3)), 40);
        let b = FixedPointReal::from_rational(&BigRational::new(big(2), big(3)), 50);
        let s = a.add(&b);
        assert_eq!(s.err_bits(), Some(39));
        assert!((s.value() - BigRational::one()).abs() <= s.error_bound());
        assert!(FixedPointReal::from_f64(0.75).is_exact());
        assert_eq!(FixedPointReal::from_f64(-1.25).floor(), big(-2));
        assert_eq!(FixedPointReal::from_f64(-1.25).frac().to_f64(), 0.75);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn convergent_recurrence(p in -50i64..50, d in 2u64..500, q in 1i64..40) {
                prop_assume!(d.sqrt() * d.sqrt() != d);
                let eta = QuadraticIrrational::new(p, d, q).unwrap();
                let cf = continued_fraction(&eta);
                let terms: Vec<BigInt> = cf.terms().take(20).collect();
                let cs = convergents(&eta, 20);
                for i in 2..cs.len() {
                    prop_assert_eq!(&cs[i].1, &(&terms[i] * &cs[i - 1].1 + &cs[i - 2].1));
                    prop_assert!(cs[i].1 > cs[i - 1].1);
                }
            }

            #[test]
            fn dirichlet_inequality(num in 0u64..1_000_000_007, den in 1u64..1_000_000_007, tau in 1u64..100_000) {
                let t = FixedPointReal::from_rational(&BigRational::new(num.into(), den.into()), 80);
                let a = dirichlet_approx(&t, tau).unwrap();
                prop_assert!(a.q >= 1 && a.q <= tau);
                prop_assert!(a.d.gcd(&BigInt::from(a.q)).is_one());
                let dev = (t.value() - a.as_rational()).abs() + t.error_bound();
                prop_assert!(dev <= BigRational::new(BigInt::one(), BigInt::from(a.q) * tau));
            }

            #[test]
            fn window_test_matches_fixed_point(n in 1u64..1_000_000, an in 1i64..99, len in 1i64..50) {
                prop_assume!(an + len < 100);
                let eta = QuadraticIrrational::sqrt(3).unwrap();
                let w = Window::new(BigRational::new(an.into(), 100.into()), BigRational::new((an + len).into(), 100.into())).unwrap();
                let f = frac_part(&eta, n, 128).value();
                let inside = &f > w.a() && &f < w.b();
                prop_assert_eq!(window_test(&eta, n, &w), inside);
            }
        }
    }
}
