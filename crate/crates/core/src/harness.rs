//! Experiments comparing `J(N)` with `I(N)·σ(N)` and with `I(N)·(b−a)⁵`, the
//! cup sandwich, and the growth of `I(N)`.

use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::{count_range, weighted_count_exact, RepCountTable};
use crate::diophantine::QuadraticIrrational;
use crate::error::{Error, Result};
use crate::expsum::ScanRow;
use crate::primes::{sieve, special_primes, FilterExponent, PrimeTable, SpecialPrimeSet, Window};
use crate::report::{Cell, ReportFormat, ReportRow};
use crate::sigma::{SigmaRow, SigmaSeries};
use crate::smoothing::sandwich_weights;

/// Bits kept for `{ηp²}` when evaluating cups.
pub const SANDWICH_POINT_BITS: u32 = 64;

/// `N ≡ r (mod m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Residue {
    pub r: u64,
    pub m: u64,
}

impl Residue {
    pub fn new(r: u64, m: u64) -> Result<Self> {
        if m == 0 || r >= m {
            return Err(Error::Config(format!("residue {r} mod {m} needs 0 ≤ r < m")));
        }
        Ok(Self { r, m })
    }

    pub fn admits(&self, n: u64) -> bool {
        n % self.m == self.r
    }
}

impl Default for Residue {
    fn default() -> Self {
        Self { r: 5, m: 24 }
    }
}

impl FromStr for Residue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { what: "residue r:m", input: s.to_string() };
        let (r, m) = s.split_once(':').ok_or_else(bad)?;
        Residue::new(r.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub eta: QuadraticIrrational,
    pub window: Window,
    pub exponent: FilterExponent,
    pub nmin: u64,
    pub nmax: u64,
    /// `None` keeps every `N`.
    pub residue: Option<Residue>,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            eta: QuadraticIrrational::sqrt(2).expect("2 is not a square"),
            window: Window::from_ratios((1, 10), (3, 5)).expect("valid window"),
            exponent: FilterExponent::Square,
            nmin: 1_000_000,
            nmax: 2_000_000,
            residue: Some(Residue::default()),
            tol: 1e-9,
            output: None,
            format: ReportFormat::Csv,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nmin == 0 || self.nmin > self.nmax {
            return Err(Error::Config(format!("need 1 ≤ nmin ≤ nmax, got {}..{}", self.nmin, self.nmax)));
        }
        Ok(())
    }

    /// `N ∈ [nmin, nmax]` passing the residue filter.
    pub fn retained(&self) -> Vec<u64> {
        (self.nmin..=self.nmax).filter(|&n| self.residue.is_none_or(|r| r.admits(n))).collect()
    }
}

/// Primes up to `√nmax`, their special subset and both count tables.
#[derive(Clone, Debug)]
pub struct CountTables {
    pub primes: PrimeTable,
    pub special: SpecialPrimeSet,
    pub all: RepCountTable,
    pub filtered: RepCountTable,
}

pub fn build_tables(cfg: &ExperimentConfig) -> Result<CountTables> {
    cfg.validate()?;
    let primes = sieve(cfg.nmax.sqrt().max(2))?;
    let special = special_primes(&primes, &cfg.eta, &cfg.window, cfg.exponent);
    let all = count_range(cfg.nmax, primes.primes())?;
    let filtered = count_range(cfg.nmax, &special.members)?;
    Ok(CountTables { primes, special, all, filtered })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "I")]
    pub i: u64,
    #[serde(rename = "J")]
    pub j: u64,
    pub sigma: f64,
    pub naive: f64,
    pub ratio: Option<f64>,
    pub abs_err_sigma: f64,
    pub abs_err_naive: f64,
}

impl ReportRow for VerifyRow {
    const HEADER: &'static [&'static str] =
        &["N", "I", "J", "sigma", "naive", "ratio", "abs_err_sigma", "abs_err_naive"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n.into()),
            Cell::Int(self.i.into()),
            Cell::Int(self.j.into()),
            Cell::Float(self.sigma),
            Cell::Float(self.naive),
            self.ratio.map_or(Cell::Absent, Cell::Float),
            Cell::Float(self.abs_err_sigma),
            Cell::Float(self.abs_err_naive),
        ]
    }
}

/// Statistics over rows with `I > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifySummary {
    pub rows: usize,
    pub used: usize,
    pub naive: f64,
    pub rmse_sigma: f64,
    pub rmse_naive: f64,
    pub correlation: f64,
    /// Median of `|J − Iσ|/(Iσ)` over rows with `Iσ > 0`.
    pub median_rel_sigma: f64,
    pub median_rel_naive: f64,
    pub mean_sigma: f64,
    pub special_primes: usize,
    pub primes: usize,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub summary: VerifySummary,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

pub fn rmse(xs: &[f64], ys: &[f64]) -> f64 {
    let sq: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - y) * (x - y)).collect();
    mean(&sq).sqrt()
}

/// Pearson correlation; NaN when either side is constant.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn compare(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let tables = build_tables(cfg)?;
    let ns = cfg.retained();
    let series = SigmaSeries::new(&cfg.window, cfg.tol)?;
    let naive = cfg.window.length_f64().powi(5);
    let sigmas: Vec<f64> =
        ns.par_iter().map(|&n| series.evaluate(&cfg.eta, n).map(|e| e.value)).collect::<Result<_>>()?;
    let rows: Vec<VerifyRow> = ns
        .iter()
        .zip(&sigmas)
        .map(|(&n, &sigma)| {
            let i = tables.all.get(n);
            let j = tables.filtered.get(n);
            let (fi, fj) = (i as f64, j as f64);
            VerifyRow {
                n,
                i,
                j,
                sigma,
                naive,
                ratio: (i > 0).then(|| fj / fi),
                abs_err_sigma: (fj - fi * sigma).abs(),
                abs_err_naive: (fj - fi * naive).abs(),
            }
        })
        .collect();

    let used: Vec<&VerifyRow> = rows.iter().filter(|r| r.i > 0).collect();
    let ratios: Vec<f64> = used.iter().filter_map(|r| r.ratio).collect();
    let sig: Vec<f64> = used.iter().map(|r| r.sigma).collect();
    let rel = |pred: fn(&VerifyRow) -> f64| -> Vec<f64> {
        used.iter()
            .filter(|r| pred(r) > 0.0)
            .map(|r| (r.j as f64 - r.i as f64 * pred(r)).abs() / (r.i as f64 * pred(r)))
            .collect()
    };
    let summary = VerifySummary {
        rows: rows.len(),
        used: used.len(),
        naive,
        rmse_sigma: rmse(&ratios, &sig),
        rmse_naive: rmse(&ratios, &vec![naive; ratios.len()]),
        correlation: correlation(&ratios, &sig),
        median_rel_sigma: median(&rel(|r| r.sigma)),
        median_rel_naive: median(&rel(|r| r.naive)),
        mean_sigma: mean(&sigmas),
        special_primes: tables.special.members.len(),
        primes: tables.primes.len(),
    };
    Ok(VerifyReport { rows, summary })
}

/// `J` against `I·σ` and `I·(b−a)⁵` with the `{ηp²}` filter.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    if cfg.exponent != FilterExponent::Square {
        return Err(Error::Config("verify uses the {η·p²} filter (exponent 2)".into()));
    }
    compare(cfg)
}

/// The same comparison with the `{ηp}` filter, where `(b−a)⁵` is the expected density.
pub fn run_linear_remark(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    if cfg.exponent != FilterExponent::Linear {
        return Err(Error::Config("linear-remark uses the {η·p} filter (exponent 1)".into()));
    }
    compare(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J")]
    pub j: u64,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub ok: bool,
}

impl ReportRow for SandwichRow {
    const HEADER: &'static [&'static str] = &["N", "J1", "J", "J2", "ok"];

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n.into()),
            Cell::Float(self.j1),
            Cell::Int(self.j.into()),
            Cell::Float(self.j2),
            Cell::Text(self.ok.to_string()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichSummary {
    pub rows: usize,
    pub violations: usize,
    /// `max_N (J₂ − J₁) / max(max_N J, 1)`.
    pub gap: f64,
    /// Rows with `J₁ = J = J₂` exactly.
    pub tight: usize,
}

#[derive(Clone, Debug)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub summary: SandwichSummary,
}

/// Exact check of `J₁(N) ≤ J(N) ≤ J₂(N)` for every `N ∈ [nmin, nmax]`; the residue
/// filter does not apply here.
pub fn run_sandwich(cfg: &ExperimentConfig, delta: &BigRational, r: u32) -> Result<SandwichReport> {
    cfg.validate()?;
    if cfg.exponent != FilterExponent::Square {
        return Err(Error::Config("sandwich uses the {η·p²} filter (exponent 2)".into()));
    }
    let primes = sieve(cfg.nmax.sqrt().max(2))?;
    let weights = sandwich_weights(&cfg.window, delta, r, &cfg.eta, primes.primes(), SANDWICH_POINT_BITS)?;
    let lower = weighted_count_exact(cfg.nmax, &weights.lower_map())?;
    let upper = weighted_count_exact(cfg.nmax, &weights.upper_map())?;
    let exact = count_range(cfg.nmax, &weights.members())?;

    let mut max_gap = BigRational::zero();
    let mut max_j = 1u64;
    let mut violations = 0;
    let mut tight = 0;
    let rows: Vec<SandwichRow> = (cfg.nmin..=cfg.nmax)
        .map(|n| {
            let j = exact.get(n);
            let ok = lower.cmp_integer(n, j).is_le() && upper.cmp_integer(n, j).is_ge();
            violations += usize::from(!ok);
            if lower.cmp_integer(n, j).is_eq() && upper.cmp_integer(n, j).is_eq() {
                tight += 1;
            }
            let gap = upper.value(n) - lower.value(n);
            if gap > max_gap {
                max_gap = gap;
            }
            max_j = max_j.max(j);
            SandwichRow { n, j1: lower.to_f64(n), j, j2: upper.to_f64(n), ok }
        })
        .collect();
    let gap = (max_gap / BigRational::from_integer(BigInt::from(max_j))).to_f64().unwrap_or(f64::NAN);
    let summary = SandwichSummary { rows: rows.len(), violations, gap, tight };
    Ok(SandwichReport { rows, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "I")]
    pub i: u64,
    pub normalized: f64,
}

impl ReportRow for GrowthRow {
    const HEADER: &'static [&'static str] = &["N", "I", "normalized"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.n.into()), Cell::Int(self.i.into()), Cell::Float(self.normalized)]
    }
}

/// `max/min` of the normalized count and the number of zeros in one sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spread {
    pub rows: usize,
    pub zeros: usize,
    /// Over nonzero rows; NaN when there are none.
    pub max_over_min: f64,
}

impl Spread {
    fn of<'a>(rows: impl Iterator<Item = &'a GrowthRow>) -> Self {
        let mut count = 0;
        let mut zeros = 0;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for r in rows {
            count += 1;
            if r.i == 0 {
                zeros += 1;
            } else {
                lo = lo.min(r.normalized);
                hi = hi.max(r.normalized);
            }
        }
        let max_over_min = if zeros < count { hi / lo } else { f64::NAN };
        Self { rows: count, zeros, max_over_min }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthSummary {
    /// Zeros over every retained row.
    pub zeros: usize,
    /// Retained rows with `N ∈ [nmax/10, nmax]`.
    pub top_decade: Spread,
    /// Top-decade `N` outside the residue class.
    pub control: Spread,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub summary: GrowthSummary,
}

pub fn normalized_growth(n: u64, i: u64) -> f64 {
    let nf = n as f64;
    i as f64 * nf.ln().powi(5) / nf.powf(1.5)
}

/// `I(N)·ln⁵N / N^{3/2}` over retained `N`.
pub fn run_growth_check(cfg: &ExperimentConfig) -> Result<GrowthReport> {
    cfg.validate()?;
    if cfg.nmax < 100_000 {
        return Err(Error::Config(format!("growth check needs nmax ≥ 10^5, got {}", cfg.nmax)));
    }
    let primes = sieve(cfg.nmax.sqrt())?;
    let all = count_range(cfg.nmax, primes.primes())?;
    let row = |n: u64| GrowthRow { n, i: all.get(n), normalized: normalized_growth(n, all.get(n)) };
    let rows: Vec<GrowthRow> = cfg.retained().into_iter().map(row).collect();
    let decade_start = (cfg.nmax / 10).max(cfg.nmin);
    let top_decade = Spread::of(rows.iter().filter(|r| r.n >= decade_start));
    let control_rows: Vec<GrowthRow> = match cfg.residue {
        Some(res) => (decade_start..=cfg.nmax).filter(|&n| !res.admits(n)).map(row).collect(),
        None => Vec::new(),
    };
    let summary = GrowthSummary {
        zeros: rows.iter().filter(|r| r.i == 0).count(),
        top_decade,
        control: Spread::of(control_rows.iter()),
    };
    Ok(GrowthReport { rows, summary })
}

impl ReportRow for SigmaRow {
    const HEADER: &'static [&'static str] = &["N", "theta", "sigma", "tail_bound"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.n.into()), Cell::Float(self.theta), Cell::Float(self.sigma), Cell::Float(self.tail_bound)]
    }
}

impl ReportRow for ScanRow {
    const HEADER: &'static [&'static str] = &["t", "d", "q", "kind", "abs_S", "normalized"];

    fn cells(&self) -> Vec<Cell> {
        let kind = match self.kind {
            crate::expsum::ArcKind::Major => "major",
            crate::expsum::ArcKind::Minor => "minor",
        };
        vec![
            Cell::Float(self.t),
            Cell::Int(self.d.into()),
            Cell::Int(self.q.into()),
            Cell::Text(kind.into()),
            Cell::Float(self.abs_s),
            Cell::Float(self.normalized),
        ]
    }
}

/// `N,count` rows of a count table.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRow {
    pub n: u64,
    pub count: u64,
}

impl ReportRow for CountRow {
    const HEADER: &'static [&'static str] = &["N", "count"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.n.into()), Cell::Int(self.count.into())]
    }
}

/// One prime per row, with `{η·p^e}` when a filter was applied.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeRow {
    pub p: u64,
    pub frac: Option<f64>,
}

impl ReportRow for PrimeRow {
    const HEADER: &'static [&'static str] = &["p", "frac"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.p.into()), self.frac.map_or(Cell::Absent, Cell::Float)]
    }
}
