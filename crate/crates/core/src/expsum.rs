//! Exponential sums `S(x) = Σ_{p ≤ √N} e^{2πi x p²}` and major/minor arc labels.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::WeightMap;
use crate::diophantine::{dirichlet_approx, scaled_multiple, FixedPointReal, QuadraticIrrational, RationalApprox};
use crate::error::{Error, Result};
use crate::primes::sieve;

pub const DEFAULT_EPSILON_Q: f64 = 0.001;
pub const MAX_SCAN_SAMPLES: usize = 100_000;

/// `{x·k}` for an integer `k < 2^60`, computed exactly from the binary expansion
/// of `x` and rounded once to `f64`.
pub fn frac_times(x: f64, k: u64) -> f64 {
    let xf = x.rem_euclid(1.0);
    if xf == 0.0 {
        return 0.0;
    }
    let bits = xf.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let (mant, shift) =
        if exp == 0 { (bits & ((1 << 52) - 1), 1074) } else { ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp) };
    if shift > 127 || k >= 1 << 60 {
        return (xf * k as f64).rem_euclid(1.0);
    }
    let prod = mant as u128 * k as u128;
    let frac = prod & ((1u128 << shift) - 1);
    (frac as f64 / 2f64.powi(shift)).min(1.0 - f64::EPSILON / 2.0)
}

/// Primes `p ≤ √N` with their squares, ready for repeated sums.
#[derive(Clone, Debug)]
pub struct PrimeSquareSum {
    n: u64,
    primes: Vec<u64>,
}

impl PrimeSquareSum {
    pub fn new(n: u64) -> Result<Self> {
        if n < 4 {
            return Err(Error::OutOfRange { what: "N", value: n.to_string(), range: "N ≥ 4" });
        }
        let root = n.sqrt();
        let primes = sieve(root)?.primes().to_vec();
        Ok(Self { n, primes })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `π(√N)`.
    pub fn prime_count(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `S(x)`; each phase is accurate to a few ulps, so `|error| ≤ π(√N)·2⁻⁴⁵`.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.primes.iter().map(|&p| phase(x, p)).sum()
    }

    /// `Σ w(p) e^{2πi x p²}` with absent primes weighted 0.
    pub fn eval_weighted(&self, x: f64, weights: &WeightMap) -> Complex64 {
        self.primes.iter().filter_map(|p| weights.get(p).map(|&w| phase(x, *p) * w)).sum()
    }
}

fn phase(x: f64, p: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * frac_times(x, p * p))
}

pub fn eval_s(x: f64, n: u64) -> Result<Complex64> {
    Ok(PrimeSquareSum::new(n)?.eval(x))
}

pub fn weighted_s(x: f64, n: u64, weights: &WeightMap) -> Result<Complex64> {
    Ok(PrimeSquareSum::new(n)?.eval_weighted(x, weights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcKind {
    Major,
    Minor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcLabel {
    pub kind: ArcKind,
    pub approx: RationalApprox,
    pub tau: u64,
    pub q_threshold: u64,
}

/// `τ = ⌊N^{1−ε}⌋` and `q₀ = max(1, ⌊N^ε⌋)`.
pub fn arc_parameters(n: u64, epsilon_q: f64) -> (u64, u64) {
    let nf = n as f64;
    let tau = nf.powf(1.0 - epsilon_q).floor().max(1.0) as u64;
    let q_threshold = nf.powf(epsilon_q).floor().max(1.0) as u64;
    (tau, q_threshold)
}

/// Reduces `t` into `[−1/τ, 1 − 1/τ)` and labels it Major iff its Dirichlet
/// denominator satisfies `q ≤ q₀`.
pub fn arc_classify(t: &FixedPointReal, n: u64, epsilon_q: f64) -> Result<ArcLabel> {
    if !(epsilon_q > 0.0 && epsilon_q < 1.0) {
        return Err(Error::OutOfRange { what: "epsilon_q", value: epsilon_q.to_string(), range: "(0, 1)" });
    }
    let (tau, q_threshold) = arc_parameters(n, epsilon_q);
    let mut reduced = t.frac();
    // [1 − 1/τ, 1) moves down by one.
    if reduced.to_f64() * tau as f64 >= tau as f64 - 1.0 {
        let top = FixedPointReal::exact_integer(1);
        let edge = top.sub(&FixedPointReal::from_rational(
            &num_rational::BigRational::new(1.into(), tau.into()),
            reduced.frac_bits().max(64),
        ));
        if reduced.value() >= edge.value() {
            reduced = reduced.sub(&top);
        }
    }
    let approx = dirichlet_approx(&reduced, tau)?;
    let kind = if approx.q <= q_threshold { ArcKind::Major } else { ArcKind::Minor };
    Ok(ArcLabel { kind, approx, tau, q_threshold })
}

/// Dirichlet approximation `X/Y` of `t + m'·η` with `Y ≤ τ`, hence `|t + m'η − X/Y| ≤ 1/Y²`.
pub fn shifted_approx(t: &FixedPointReal, mprime: i64, eta: &QuadraticIrrational, tau: u64) -> Result<RationalApprox> {
    if mprime.unsigned_abs() > 1_000_000 {
        return Err(Error::OutOfRange { what: "m'", value: mprime.to_string(), range: "|m'| ≤ 10^6" });
    }
    let bits = (2 * (64 - tau.leading_zeros()) + 64).max(t.frac_bits());
    let shift = scaled_multiple(eta, &BigInt::from(mprime), bits);
    dirichlet_approx(&t.add(&shift), tau)
}

/// The denominator range `(√τ·N^{−0.01015}·ln N, √τ·N^{0.001})` that the argument
/// for the shifted sums works with; diagnostic only.
pub fn y_corridor(n: u64, tau: u64) -> (f64, f64) {
    let nf = n as f64;
    let root = (tau as f64).sqrt();
    (root * nf.powf(-0.01015) * nf.ln(), root * nf.powf(0.001))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub d: i64,
    pub q: u64,
    pub kind: ArcKind,
    #[serde(rename = "abs_S")]
    pub abs_s: f64,
    pub normalized: f64,
}

/// Seeded sample of points in `[−1/τ, 1 − 1/τ)` with their labels and `|S(t)|`.
/// Reports magnitudes only; no bound is asserted.
pub fn minor_arc_scan(n: u64, samples: usize, seed: u64, epsilon_q: f64) -> Result<Vec<ScanRow>> {
    if samples > MAX_SCAN_SAMPLES {
        return Err(Error::OutOfRange { what: "samples", value: samples.to_string(), range: "≤ 10^5" });
    }
    let sum = PrimeSquareSum::new(n)?;
    let (tau, _) = arc_parameters(n, epsilon_q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<f64> = (0..samples).map(|_| rng.random::<f64>() - 1.0 / tau as f64).collect();
    let count = sum.prime_count() as f64;
    points
        .par_iter()
        .map(|&t| {
            let label = arc_classify(&FixedPointReal::from_f64(t), n, epsilon_q)?;
            let abs_s = sum.eval(t).norm();
            Ok(ScanRow {
                t,
                d: label.approx.d.to_i64().unwrap_or(i64::MAX),
                q: label.approx.q,
                kind: label.kind,
                abs_s,
                normalized: abs_s / count,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::frac_part;
    use num_rational::BigRational;

    #[test]
    fn exact_fractional_products() {
        assert_eq!(frac_times(0.5, 9), 0.5);
        assert_eq!(frac_times(0.5, 4), 0.0);
        assert_eq!(frac_times(-0.25, 3), 0.25);
        assert_eq!(frac_times(1.75, 3), 0.25);
        let x = 0.1f64;
        let naive = (x * 999_983f64 * 999_983f64).rem_euclid(1.0);
        let exact = frac_times(x, 999_983 * 999_983);
        assert!((naive - exact).abs() < 1e-3);
    }

    #[test]
    fn basic_values() {
        let s = PrimeSquareSum::new(100).unwrap();
        assert_eq!(s.prime_count(), 4);
        assert_eq!(s.eval(0.0), Complex64::new(4.0, 0.0));
        let half = s.eval(0.5);
        assert!((half - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        let big = PrimeSquareSum::new(1_000_000).unwrap();
        assert_eq!(big.eval(0.0).re, 168.0);
        for x in [0.1234, 0.77, 0.5 + 1e-9] {
            assert!((big.eval(x) - big.eval(x + 1.0)).norm() < 1e-9 * 168.0);
            assert!((big.eval(-x) - big.eval(x).conj()).norm() < 1e-9 * 168.0);
        }
        assert!(PrimeSquareSum::new(3).is_err());
    }

    #[test]
    fn weighted_sums() {
        let s = PrimeSquareSum::new(10_000).unwrap();
        let ones: WeightMap = s.primes().iter().map(|&p| (p, 1.0)).collect();
        let zeros: WeightMap = s.primes().iter().map(|&p| (p, 0.0)).collect();
        for x in [0.0, 0.3, 0.91] {
            assert_eq!(s.eval_weighted(x, &ones), s.eval(x));
            assert_eq!(s.eval_weighted(x, &zeros), Complex64::new(0.0, 0.0));
        }
        let subset: WeightMap = s.primes().iter().filter(|&&p| p % 4 == 1).map(|&p| (p, 1.0)).collect();
        assert_eq!(s.eval_weighted(0.0, &subset).re, subset.len() as f64);
        let by_hand: Complex64 = subset.keys().map(|&p| phase(0.37, p)).sum();
        assert_eq!(s.eval_weighted(0.37, &subset), by_hand);
    }

    #[test]
    fn classification() {
        let n = 1_000_000;
        let label = arc_classify(&FixedPointReal::from_f64(0.0), n, DEFAULT_EPSILON_Q).unwrap();
        assert_eq!((label.kind, label.approx.q), (ArcKind::Major, 1));
        let label = arc_classify(&FixedPointReal::from_f64(0.5), 1 << 40, 0.05).unwrap();
        assert_eq!((label.kind, label.approx.q, label.q_threshold), (ArcKind::Major, 2, 4));
        let t = frac_part(&QuadraticIrrational::sqrt(2).unwrap(), 17, 128);
        let label = arc_classify(&t, n, DEFAULT_EPSILON_Q).unwrap();
        assert_eq!(label.q_threshold, 1);
        assert_eq!(label.kind, ArcKind::Minor);
        assert!(label.approx.q > 1 && label.approx.q <= label.tau);
    }

    #[test]
    fn reduction_into_fundamental_interval() {
        let n = 1_000_000;
        let (tau, _) = arc_parameters(n, DEFAULT_EPSILON_Q);
        let t = FixedPointReal::from_f64(1.0 - 0.5 / tau as f64);
        let label = arc_classify(&t, n, DEFAULT_EPSILON_Q).unwrap();
        assert_eq!((label.approx.d.clone(), label.approx.q), (BigInt::from(0), 1));
        assert_eq!(label.kind, ArcKind::Major);
    }

    #[test]
    fn shifted_approximations() {
        let eta = QuadraticIrrational::sqrt(2).unwrap();
        let zero = FixedPointReal::from_f64(0.0);
        let a = shifted_approx(&zero, 1, &eta, 1000).unwrap();
        // last convergent of √2 with denominator ≤ 1000
        assert_eq!((a.d.clone(), a.q), (BigInt::from(1393), 985));
        let two = 2f64.sqrt();
        assert!((two - 1393.0 / 985.0).abs() <= 1.0 / (985.0 * 985.0));
        assert!((two - 577.0 / 408.0).abs() <= 1.0 / (408.0 * 408.0));

        let third = FixedPointReal::from_rational(&BigRational::new(1.into(), 3.into()), 128);
        let a = shifted_approx(&third, 1, &eta, 1000).unwrap();
        let value = 1.0 / 3.0 + two;
        let y = a.q as f64;
        assert!((value - a.d.to_f64().unwrap() / y).abs() <= 1.0 / (y * y));

        let t = FixedPointReal::from_f64(0.123456789);
        assert_eq!(shifted_approx(&t, 0, &eta, 5000).unwrap(), dirichlet_approx(&t, 5000).unwrap());
        assert!(shifted_approx(&t, 2_000_000, &eta, 10).is_err());
    }

    #[test]
    fn corridor_scales_with_tau() {
        // empty at any testable N: ln N dominates N^0.01115 only asymptotically
        let n = 1u64 << 40;
        let (tau, _) = arc_parameters(n, DEFAULT_EPSILON_Q);
        let (lo, hi) = y_corridor(n, tau);
        assert!(lo > hi && hi > 0.0);
        let (lo4, hi4) = y_corridor(n, 4 * tau);
        assert!((lo4 / lo - 2.0).abs() < 1e-12 && (hi4 / hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_rows() {
        let n = 1_000_000;
        let rows = minor_arc_scan(n, 1000, 7, DEFAULT_EPSILON_Q).unwrap();
        assert_eq!(rows.len(), 1000);
        for r in &rows {
            assert!(r.abs_s <= 168.0 + 1e-9);
            if r.kind == ArcKind::Minor {
                assert!(r.t != 0.0 && r.q > 1);
            }
        }
        let again = minor_arc_scan(n, 1000, 7, DEFAULT_EPSILON_Q).unwrap();
        assert!(rows.iter().zip(&again).all(|(a, b)| a.t == b.t && a.abs_s == b.abs_s));
        assert!(minor_arc_scan(n, MAX_SCAN_SAMPLES + 1, 7, DEFAULT_EPSILON_Q).is_err());
    }
}
