//! The oscillating factor
//!
//! ```text
//! σ(N, a, b) = Σ_m e^{2πi m (ηN − 5(a+b)/2)} · sin⁵(πm(b−a)) / (π⁵ m⁵)
//! ```
//!
//! evaluated two independent ways: the truncated Fourier series with a
//! certified tail bound, and the closed form of the 5-fold circular
//! convolution of the window indicator (an order-5 Irwin–Hall density,
//! wrapped mod 1).

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::{frac_part, FixedPointReal, QuadraticIrrational};
use crate::error::{Error, Result};
use crate::primes::Window;

/// Fractional bits used for `{ηN}`.
pub const ARGUMENT_BITS: u32 = 128;
pub const MIN_TOL: f64 = 1e-12;
/// Bound on `|σ'(θ)| · 2^-52`: the effect of rounding θ to an `f64`.
pub const ARGUMENT_SLACK: f64 = 0.05 * f64::EPSILON;
const IMAG_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SigmaEvaluation {
    pub n: u64,
    pub value: f64,
    pub m_cut: u64,
    pub tail_bound: f64,
    /// `{ηN − 5(a+b)/2}`.
    pub theta: FixedPointReal,
    /// `{ηN}` rounded to `f64`.
    pub frac_eta_n: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub theta: f64,
    pub sigma: f64,
    pub tail_bound: f64,
}

impl From<&SigmaEvaluation> for SigmaRow {
    fn from(e: &SigmaEvaluation) -> Self {
        Self { n: e.n, theta: e.theta.to_f64(), sigma: e.value, tail_bound: e.tail_bound }
    }
}

/// Smallest `M` with `2·Σ_{m>M} (π m)^-5 ≤ 1/(2π⁵M⁴) ≤ tol`.
pub fn truncation_for(tol: f64) -> u64 {
    let m = (1.0 / (2.0 * PI.powi(5) * tol)).powf(0.25).ceil() as u64;
    let mut m = m.max(1);
    while truncation_tail(m) > tol {
        m += 1;
    }
    m
}

pub fn truncation_tail(m_cut: u64) -> f64 {
    1.0 / (2.0 * PI.powi(5) * (m_cut as f64).powi(4))
}

/// Window-dependent part of the series, reusable across `N`.
#[derive(Clone, Debug)]
pub struct SigmaSeries {
    /// `coeffs[m] = (sin(πmL)/(πm))⁵`, `coeffs[0] = L⁵`.
    coeffs: Vec<f64>,
    /// `5(a+b)/2` as an exact rational.
    shift: BigRational,
    tail_bound: f64,
}

impl SigmaSeries {
    pub fn new(w: &Window, tol: f64) -> Result<Self> {
        if tol.is_nan() || tol < MIN_TOL {
            return Err(Error::OutOfRange { what: "tol", value: tol.to_string(), range: "tol ≥ 1e-12" });
        }
        let m_cut = truncation_for(tol);
        let len = w.length_f64();
        let coeffs = (0..=m_cut)
            .map(|m| {
                if m == 0 {
                    len.powi(5)
                } else {
                    let x = PI * m as f64;
                    ((x * len).sin() / x).powi(5)
                }
            })
            .collect();
        let shift = (w.a() + w.b()) * BigRational::new(BigInt::from(5), BigInt::from(2));
        let rounding = (2 * m_cut + 1) as f64 * 4.0 * f64::EPSILON;
        Ok(Self { coeffs, shift, tail_bound: truncation_tail(m_cut) + rounding })
    }

    pub fn m_cut(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `Σ_{|m|≤M} c_m e^{2πimθ}` at the shifted argument θ; checks the imaginary residue.
    pub fn eval_shifted(&self, theta: f64) -> Result<f64> {
        let m_cut = self.m_cut() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in -m_cut..=m_cut {
            let c = self.coeffs[m.unsigned_abs() as usize];
            let phase = 2.0 * PI * (m as f64 * theta).fract();
            acc += Complex64::new(phase.cos(), phase.sin()) * c;
        }
        if acc.im.abs() > IMAG_LIMIT {
            return Err(Error::ImaginaryResidue(acc.im));
        }
        Ok(acc.re)
    }

    /// The series as a function of `{ηN}`.
    pub fn eval_at(&self, frac_eta_n: f64) -> Result<f64> {
        let shift = FixedPointReal::from_rational(&self.shift, 60).to_f64();
        self.eval_shifted((frac_eta_n - shift).rem_euclid(1.0))
    }

    pub fn evaluate(&self, eta: &QuadraticIrrational, n: u64) -> Result<SigmaEvaluation> {
        let frac = frac_part(eta, n, ARGUMENT_BITS);
        let theta = frac.sub(&FixedPointReal::from_rational(&self.shift, ARGUMENT_BITS)).frac();
        if theta.certified_bits() < 96 {
            return Err(Error::InsufficientPrecision(format!(
                "argument certified to {} bits, 96 required",
                theta.certified_bits()
            )));
        }
        let value = self.eval_shifted(theta.to_f64())?;
        Ok(SigmaEvaluation {
            n,
            value,
            m_cut: self.m_cut(),
            tail_bound: self.tail_bound,
            theta,
            frac_eta_n: frac.to_f64(),
        })
    }
}

/// σ(N, a, b) with truncation chosen for `tol`.
pub fn sigma_series(eta: &QuadraticIrrational, n: u64, w: &Window, tol: f64) -> Result<SigmaEvaluation> {
    SigmaSeries::new(w, tol)?.evaluate(eta, n)
}

/// Per-`N` evaluations sharing the window's coefficients.
pub fn sigma_profile(eta: &QuadraticIrrational, w: &Window, ns: &[u64], tol: f64) -> Result<Vec<SigmaEvaluation>> {
    if ns.is_empty() {
        return Err(Error::Config("sigma_profile needs at least one N".into()));
    }
    let series = SigmaSeries::new(w, tol)?;
    ns.par_iter().map(|&n| series.evaluate(eta, n)).collect()
}

/// Order-5 Irwin–Hall density `(1/24) Σ_k (−1)^k C(5,k) (x−k)₊⁴` on `[0, 5]`.
pub fn irwin_hall5(x: f64) -> f64 {
    if !(0.0..=5.0).contains(&x) {
        return 0.0;
    }
    // Use the mirror image on the right half to keep the alternating sum short.
    let x = if x > 2.5 { 5.0 - x } else { x };
    const BINOM: [f64; 6] = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
    let mut acc = 0.0;
    for (k, b) in BINOM.iter().enumerate() {
        let t = x - k as f64;
        if t <= 0.0 {
            break;
        }
        let term = b * t.powi(4);
        acc += if k % 2 == 0 { term } else { -term };
    }
    acc / 24.0
}

/// Density of `U₁+…+U₅ mod 1` at `θ`, `U_i` uniform on `(a, b)`, times `L⁵`:
/// `L⁴ Σ_j f₅((θ − 5a + j)/L)`.
pub fn sigma_oracle(theta: f64, w: &Window) -> f64 {
    let (a, len) = (w.a_f64(), w.length_f64());
    let base = theta - 5.0 * a;
    let lo = (-base).floor() as i64;
    let hi = (5.0 * len - base).ceil() as i64;
    let sum: f64 = (lo..=hi).map(|j| irwin_hall5((base + j as f64) / len)).sum();
    len.powi(4) * sum
}
