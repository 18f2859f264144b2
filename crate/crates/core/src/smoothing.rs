//! Smoothed periodic indicators ("cups").
//!
//! A cup is the 1-periodic indicator of `[α, β]` convolved `r` times with a
//! centred boxcar of width `Δ/r`. It equals 1 on `[α+Δ/2, β−Δ/2]`, vanishes
//! outside `(α−Δ/2, β+Δ/2)`, and its Fourier coefficients are the interval
//! coefficient times `r` sinc factors. Point values are exact rationals via
//! the Irwin–Hall CDF.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::counting::ExactWeightMap;
use crate::diophantine::{frac_part, window_test, QuadraticIrrational};
use crate::error::{Error, Result};
use crate::primes::Window;

#[derive(Clone, Debug, PartialEq)]
pub struct CupFunction {
    alpha: BigRational,
    beta: BigRational,
    delta: BigRational,
    r: u32,
    binomials: Vec<BigInt>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn half() -> BigRational {
    ratio(1, 2)
}

pub fn make_cup(alpha: BigRational, beta: BigRational, delta: BigRational, r: u32) -> Result<CupFunction> {
    if r == 0 {
        return Err(Error::InvalidGeometry("smoothing order r must be positive".into()));
    }
    if alpha >= beta {
        return Err(Error::InvalidGeometry(format!("need α < β, got α = {alpha}, β = {beta}")));
    }
    let width = &beta - &alpha;
    if delta <= BigRational::zero() || delta >= width {
        return Err(Error::InvalidGeometry(format!("need 0 < Δ < β − α = {width}, got Δ = {delta}")));
    }
    if &width + &delta >= BigRational::one() {
        return Err(Error::InvalidGeometry(format!("need β − α + Δ < 1, got {}", &width + &delta)));
    }
    let mut binomials = vec![BigInt::one()];
    for k in 1..=r as usize {
        let next = &binomials[k - 1] * BigInt::from(r as usize + 1 - k) / BigInt::from(k);
        binomials.push(next);
    }
    Ok(CupFunction { alpha, beta, delta, r, binomials })
}

impl CupFunction {
    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `[α + Δ/2, β − Δ/2]`.
    pub fn plateau(&self) -> (BigRational, BigRational) {
        let h = &self.delta * half();
        (&self.alpha + &h, &self.beta - &h)
    }

    /// `(α − Δ/2, β + Δ/2)`.
    pub fn support(&self) -> (BigRational, BigRational) {
        let h = &self.delta * half();
        (&self.alpha - &h, &self.beta + &h)
    }

    fn step(&self) -> BigRational {
        &self.delta / BigRational::from_integer(BigInt::from(self.r))
    }

    /// `Σ_k (−1)^k C(r,k) (s−k)₊^e` for `s` in `[0, r]`.
    fn alternating_sum(&self, s: &BigRational, e: i32) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, b) in self.binomials.iter().enumerate() {
            let t = s - BigRational::from_integer(BigInt::from(k));
            if t <= BigRational::zero() {
                break;
            }
            let term = t.pow(e) * b;
            if k % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// CDF of the smoothing kernel (supported on `[−Δ/2, Δ/2]`).
    fn kernel_cdf(&self, u: &BigRational) -> BigRational {
        let s = (u + &self.delta * half()) / self.step();
        let r = BigRational::from_integer(BigInt::from(self.r));
        if s <= BigRational::zero() {
            BigRational::zero()
        } else if s >= r {
            BigRational::one()
        } else {
            self.alternating_sum(&s, self.r as i32) / factorial(self.r)
        }
    }

    /// Antiderivative of [`Self::kernel_cdf`] vanishing at `−∞`.
    fn kernel_cdf_integral(&self, u: &BigRational) -> BigRational {
        let hd = &self.delta * half();
        let s = (u + &hd) / self.step();
        let r = BigRational::from_integer(BigInt::from(self.r));
        if s <= BigRational::zero() {
            BigRational::zero()
        } else if s >= r {
            // ∫ up to Δ/2 equals Δ/2 (the kernel is symmetric), then slope 1.
            hd.clone() + (u - &hd)
        } else {
            self.step() * self.alternating_sum(&s, self.r as i32 + 1) / factorial(self.r + 1)
        }
    }

    fn shifts_for(&self, x: &BigRational) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = self.support();
        let first = (lo - x).floor().to_integer().to_i64().unwrap_or(0);
        let last = (hi - x).ceil().to_integer().to_i64().unwrap_or(0);
        first..=last
    }

    /// Exact `ψ(x)`; `x` is reduced mod 1.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let x = x - x.floor();
        let mut acc = BigRational::zero();
        for j in self.shifts_for(&x) {
            let y = &x + BigRational::from_integer(BigInt::from(j));
            acc += self.kernel_cdf(&(&y - &self.alpha)) - self.kernel_cdf(&(&y - &self.beta));
        }
        acc
    }

    /// `∫₀¹ ψ` by exact integration of the piecewise polynomials.
    pub fn mean_exact(&self) -> BigRational {
        let (lo, hi) = self.support();
        let first = lo.floor().to_integer().to_i64().unwrap_or(0) - 1;
        let last = hi.ceil().to_integer().to_i64().unwrap_or(0) + 1;
        let g = |u: BigRational| self.kernel_cdf_integral(&u);
        let mut acc = BigRational::zero();
        for j in first..=last {
            let j0 = BigRational::from_integer(BigInt::from(j));
            let j1 = BigRational::from_integer(BigInt::from(j + 1));
            acc += g(&j1 - &self.alpha) - g(&j0 - &self.alpha);
            acc -= g(&j1 - &self.beta) - g(&j0 - &self.beta);
        }
        acc
    }

    /// `c(m) = ∫₀¹ ψ(x) e^{−2πimx} dx`.
    pub fn fourier_coeff(&self, m: i64) -> Complex64 {
        let width = &self.beta - &self.alpha;
        if m == 0 {
            return Complex64::new(width.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        let mb = BigRational::from_integer(BigInt::from(m));
        // e^{−πim(α+β)}
        let turns = frac_of(&(&mb * (&self.alpha + &self.beta) * half()));
        let phase = Complex64::from_polar(1.0, -2.0 * PI * turns);
        let interval = sin_pi(&(&mb * &width)) / (PI * m as f64);
        let y = &mb * self.step();
        let sinc = sin_pi(&y) / (PI * y.to_f64().unwrap_or(f64::NAN));
        phase * (interval * sinc.powi(self.r as i32))
    }

    /// `(1/(π|m|))·(r/(π|m|Δ))^r`, valid for every `m ≠ 0`.
    pub fn coeff_majorant(&self, m: i64) -> f64 {
        let m = m.unsigned_abs() as f64;
        let r = self.r as f64;
        let delta = self.delta.to_f64().unwrap_or(f64::NAN);
        (1.0 / (PI * m)) * (r / (PI * m * delta)).powi(self.r as i32)
    }

    /// Certified bound on `Σ_{|m|>M} |c(m)|` from the majorant.
    pub fn tail_bound(&self, m_cut: u64) -> f64 {
        let r = self.r as f64;
        let delta = self.delta.to_f64().unwrap_or(f64::NAN);
        2.0 / PI * (r / (PI * delta)).powi(self.r as i32) / (r * (m_cut as f64).powi(self.r as i32))
    }
}

fn factorial(n: u32) -> BigRational {
    BigRational::from_integer((1..=n as u64).map(BigInt::from).product())
}

fn frac_of(x: &BigRational) -> f64 {
    (x - x.floor()).to_f64().unwrap_or(f64::NAN)
}

/// `sin(πx)` with `x` reduced mod 2 exactly first.
fn sin_pi(x: &BigRational) -> f64 {
    let two = BigRational::from_integer(BigInt::from(2));
    let reduced = x - (x / &two).floor() * &two;
    (PI * reduced.to_f64().unwrap_or(f64::NAN)).sin()
}

pub fn cup_eval(c: &CupFunction, x: &BigRational) -> BigRational {
    c.eval(x)
}

pub fn cup_fourier_coeff(c: &CupFunction, m: i64) -> Complex64 {
    c.fourier_coeff(m)
}

/// Partial Fourier sums over `|m| ≤ M` with a certified truncation bound.
#[derive(Clone, Debug)]
pub struct CupSeries {
    coeffs: Vec<Complex64>,
    bound: f64,
}

impl CupSeries {
    pub fn new(c: &CupFunction, m_cut: u64) -> Self {
        let coeffs: Vec<Complex64> = (0..=m_cut as i64).map(|m| c.fourier_coeff(m)).collect();
        let rounding = (2 * m_cut + 1) as f64 * 8.0 * f64::EPSILON;
        Self { coeffs, bound: c.tail_bound(m_cut) + rounding }
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.coeffs[0].re;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let turn = (m as f64 * x).rem_euclid(1.0);
            // c(−m) = conj(c(m)), so the pair contributes 2·Re(c(m)e^{2πimx}).
            acc += 2.0 * (c * Complex64::from_polar(1.0, 2.0 * PI * turn)).re;
        }
        acc
    }
}

pub fn cup_series_eval(c: &CupFunction, x: f64, m_cut: u64) -> (f64, f64) {
    let s = CupSeries::new(c, m_cut);
    (s.eval(x), s.bound())
}

/// The asymptotic choice `r = ⌊ln N⌋`, `Δ = N^{-0.01}` (rounded down to a multiple of 10⁻⁶).
pub fn paper_parameters(n: u64) -> (u32, BigRational) {
    let nf = n as f64;
    let r = nf.ln().floor().max(1.0) as u32;
    let micro = (nf.powf(-0.01) * 1e6).floor() as i64;
    (r, ratio(micro, 1_000_000))
}

/// Weights `w1 ≤ w0 ≤ w2` per prime for the lower cup, the window indicator and the upper cup.
#[derive(Clone, Debug)]
pub struct SandwichWeights {
    pub primes: Vec<u64>,
    pub lower: Vec<BigRational>,
    pub indicator: Vec<bool>,
    pub upper: Vec<BigRational>,
    pub lower_cup: CupFunction,
    pub upper_cup: CupFunction,
}

impl SandwichWeights {
    pub fn lower_map(&self) -> ExactWeightMap {
        self.primes.iter().copied().zip(self.lower.iter().cloned()).collect()
    }

    pub fn upper_map(&self) -> ExactWeightMap {
        self.primes.iter().copied().zip(self.upper.iter().cloned()).collect()
    }

    pub fn indicator_map(&self) -> ExactWeightMap {
        self.primes
            .iter()
            .zip(&self.indicator)
            .map(|(&p, &inside)| (p, if inside { BigRational::one() } else { BigRational::zero() }))
            .collect()
    }

    pub fn members(&self) -> Vec<u64> {
        self.primes.iter().zip(&self.indicator).filter(|(_, &i)| i).map(|(&p, _)| p).collect()
    }
}

/// Builds ψ₁ on `[a+Δ/2, b−Δ/2]` and ψ₂ on `[a−Δ/2, b+Δ/2]`, then evaluates them at
/// `{ηp²}` rounded down to `point_bits` bits. The indicator is decided exactly and
/// clamps the cups (`w1 = ψ₁·w0`, `w2 = max(ψ₂, w0)`), so the ordering holds even for
/// points within `2^-point_bits` of an endpoint.
pub fn sandwich_weights(
    w: &Window,
    delta: &BigRational,
    r: u32,
    eta: &QuadraticIrrational,
    primes: &[u64],
    point_bits: u32,
) -> Result<SandwichWeights> {
    let hd = delta * half();
    let lower_cup = make_cup(w.a() + &hd, w.b() - &hd, delta.clone(), r)?;
    let upper_cup = make_cup(w.a() - &hd, w.b() + &hd, delta.clone(), r)?;
    let evaluated: Vec<(BigRational, bool, BigRational)> = primes
        .par_iter()
        .map(|&p| {
            let n = p * p;
            let x = frac_part(eta, n, point_bits).value();
            let inside = window_test(eta, n, w);
            let lo = if inside { lower_cup.eval(&x) } else { BigRational::zero() };
            let hi = if inside { BigRational::one() } else { upper_cup.eval(&x) };
            (lo, inside, hi)
        })
        .collect();
    let mut out = SandwichWeights {
        primes: primes.to_vec(),
        lower: Vec::with_capacity(primes.len()),
        indicator: Vec::with_capacity(primes.len()),
        upper: Vec::with_capacity(primes.len()),
        lower_cup,
        upper_cup,
    };
    for (lo, inside, hi) in evaluated {
        out.lower.push(lo);
        out.indicator.push(inside);
        out.upper.push(hi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;

    fn cup(a: (i64, i64), b: (i64, i64), d: (i64, i64), r: u32) -> CupFunction {
        make_cup(ratio(a.0, a.1), ratio(b.0, b.1), ratio(d.0, d.1), r).unwrap()
    }

    #[test]
    fn geometry() {
        let c = cup((1, 4), (3, 4), (1, 10), 1);
        assert_eq!(c.plateau(), (ratio(3, 10), ratio(7, 10)));
        assert_eq!(c.support(), (ratio(1, 5), ratio(4, 5)));
        assert!(matches!(make_cup(ratio(1, 4), ratio(3, 4), ratio(3, 4), 1), Err(Error::InvalidGeometry(_))));
        assert!(make_cup(ratio(1, 10), ratio(9, 10), ratio(1, 5), 2).is_err());
        assert!(make_cup(ratio(1, 2), ratio(1, 4), ratio(1, 100), 2).is_err());
    }

    #[test]
    fn point_values() {
        let c = cup((1, 4), (3, 4), (1, 10), 1);
        assert_eq!(c.eval(&ratio(1, 2)), BigRational::one());
        assert_eq!(c.eval(&ratio(3, 10)), BigRational::one());
        assert_eq!(c.eval(&ratio(1, 10)), BigRational::zero());
        assert_eq!(c.eval(&ratio(9, 10)), BigRational::zero());
        assert_eq!(c.eval(&ratio(1, 4)), ratio(1, 2));
        assert_eq!(c.eval(&ratio(3, 4)), ratio(1, 2));
        // periodic
        assert_eq!(c.eval(&ratio(5, 4)), ratio(1, 2));
        assert_eq!(c.eval(&ratio(-3, 4)), ratio(1, 2));
        // higher order: still 1/2 at the ramp midpoints by symmetry
        let c5 = cup((1, 4), (3, 4), (1, 10), 5);
        assert_eq!(c5.eval(&ratio(1, 4)), ratio(1, 2));
    }

    #[test]
    fn wraps_around_zero() {
        // α − Δ/2 < 0: the support crosses the origin.
        let c = cup((-1, 10), (3, 10), (1, 10), 3);
        assert_eq!(c.eval(&ratio(0, 1)), BigRational::one());
        assert_eq!(c.eval(&ratio(19, 20)), c.eval(&ratio(-1, 20)));
        assert_eq!(c.eval(&ratio(9, 10)), ratio(1, 2));
        assert_eq!(c.mean_exact(), ratio(2, 5));
    }

    #[test]
    fn fourier_coefficients() {
        let c = cup((1, 4), (3, 4), (1, 10), 1);
        assert_eq!(c.fourier_coeff(0), Complex64::new(0.5, 0.0));
        let c1 = c.fourier_coeff(1);
        let sinc = (PI / 10.0).sin() / (PI / 10.0);
        assert!((sinc - 0.9836316).abs() < 1e-7);
        assert!((c1.re - (-sinc / PI)).abs() < 1e-15 && c1.im.abs() < 1e-15);
        assert!((c1.re + 0.3130997).abs() < 1e-7);
    }

    #[test]
    fn coefficient_bounds() {
        for c in [cup((1, 4), (3, 4), (1, 10), 1), cup((1, 8), (11, 20), (1, 20), 5), cup((1, 4), (3, 4), (1, 10), 10)]
        {
            let width = 0.5f64.max((&c.beta - &c.alpha).to_f64().unwrap());
            for m in (1..=10_000i64).chain([-1, -7, -9999]) {
                let a = c.fourier_coeff(m).norm();
                let bound = width.min(1.0 / (PI * m.abs() as f64)).min(c.coeff_majorant(m));
                assert!(a <= bound * (1.0 + 1e-12) + 1e-300, "m = {m}");
            }
        }
    }

    #[test]
    fn coefficients_match_numerical_integration() {
        let c = cup((1, 5), (1, 2), (1, 10), 3);
        let steps = 20_000;
        let values: Vec<f64> = (0..steps).map(|i| c.eval(&ratio(2 * i + 1, 2 * steps)).to_f64().unwrap()).collect();
        for m in [1i64, 2, 5, -3] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in values.iter().enumerate() {
                let x = (i as f64 + 0.5) / steps as f64;
                acc += Complex64::from_polar(v, -2.0 * PI * m as f64 * x);
            }
            acc /= steps as f64;
            assert!((acc - c.fourier_coeff(m)).norm() < 1e-7, "m = {m}");
        }
    }

    #[test]
    fn partial_sums_converge_inside_plateau() {
        let c = cup((1, 4), (3, 4), (1, 10), 4);
        let s = CupSeries::new(&c, 400);
        assert!((s.eval(0.5) - 1.0).abs() <= s.bound());
        assert!(s.eval(0.05).abs() <= s.bound());
        let (v1, b1) = cup_series_eval(&c, 0.3, 1);
        let (v2, b2) = cup_series_eval(&c, 0.3, 2);
        let step = 2.0 * c.fourier_coeff(2).norm();
        assert!((v1 - v2).abs() <= step + (b1 - b2).abs() + 1e-15);
    }

    #[test]
    fn exact_mean() {
        for c in [cup((1, 4), (3, 4), (1, 10), 1), cup((1, 8), (11, 20), (1, 20), 5), cup((3, 5), (6, 5), (1, 7), 2)] {
            assert_eq!(c.mean_exact(), &c.beta - &c.alpha);
            assert_eq!(c.fourier_coeff(0).re, (&c.beta - &c.alpha).to_f64().unwrap());
        }
    }

    #[test]
    fn sandwich_examples() {
        let w = Window::parse("1/10,3/5").unwrap();
        let eta = QuadraticIrrational::sqrt(2).unwrap();
        let primes = sieve(316).unwrap().primes().to_vec();
        let s = sandwich_weights(&w, &ratio(1, 20), 5, &eta, &primes, 64).unwrap();
        let (plo, phi) = s.lower_cup.plateau();
        let (slo, shi) = s.upper_cup.support();
        for (i, &p) in primes.iter().enumerate() {
            let (lo, inside, hi) = (&s.lower[i], s.indicator[i], &s.upper[i]);
            let w0 = if inside { BigRational::one() } else { BigRational::zero() };
            assert!(lo <= &w0 && &w0 <= hi);
            let x = frac_part(&eta, p * p, 64).value();
            if x > plo && x < phi {
                assert!(lo.is_one() && inside && hi.is_one());
            }
            if x < slo || x > shi {
                assert!(lo.is_zero() && !inside && hi.is_zero());
            }
        }
        assert!(sandwich_weights(&w, &ratio(3, 10), 5, &eta, &primes, 64).is_err());
    }

    #[test]
    fn paper_parameterization() {
        let (r, delta) = paper_parameters(1_000_000);
        assert_eq!(r, 13);
        assert_eq!(delta, ratio(870_963, 1_000_000));
    }
}
