use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;

use fivesquares::counting::count_range;
use fivesquares::diophantine::{frac_part, QuadraticIrrational};
use fivesquares::expsum::{minor_arc_scan, ArcKind, DEFAULT_EPSILON_Q};
use fivesquares::harness::{
    run_growth_check, run_linear_remark, run_sandwich, run_verify, CountRow, ExperimentConfig, PrimeRow, Residue,
};
use fivesquares::primes::{sieve, special_primes, FilterExponent, Window};
use fivesquares::report::{emit_report, render, Cell, ReportFormat, ReportRow};
use fivesquares::sigma::{sigma_profile, SigmaRow};
use fivesquares::smoothing::paper_parameters;
use fivesquares::{Error, Result};

/// Sums of five squares of primes with fractional parts {η·p²} in a window.
#[derive(Parser, Debug)]
#[command(name = "fivesquares", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Quadratic irrational (P + √D)/Q as "P,D,Q".
    #[arg(long, global = true, default_value = "0,2,1")]
    eta: QuadraticIrrational,
    /// Window (a, b) as "a_num/a_den,b_num/b_den".
    #[arg(long, global = true, default_value = "1/10,3/5")]
    window: Window,
    #[arg(long, global = true)]
    nmin: Option<u64>,
    #[arg(long, global = true)]
    nmax: Option<u64>,
    /// Keep N ≡ r (mod m), written "r:m". Experiments default to 5:24.
    #[arg(long = "mod", global = true)]
    residue: Option<Residue>,
    /// Keep every N in experiments that default to a residue class.
    #[arg(long, global = true, conflicts_with = "residue")]
    all_residues: bool,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormat,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Primes up to --nmax.
    Sieve,
    /// Primes p ≤ √nmax with {η·p^e} in the window.
    Special {
        #[arg(long, default_value_t = 2)]
        exponent: u32,
    },
    /// Representation counts for N in [nmin, nmax].
    Count {
        /// Count over the special primes instead of all primes.
        #[arg(long)]
        special: bool,
        #[arg(long, default_value_t = 2)]
        exponent: u32,
    },
    /// The density factor σ(N, a, b).
    Sigma,
    /// Compare J with I·σ and with I·(b−a)⁵.
    Verify,
    /// The same comparison with the {η·p} filter.
    LinearRemark,
    /// Exact check of J₁ ≤ J ≤ J₂ with smoothed windows.
    Sandwich {
        /// Smoothing width Δ as a rational such as 1/20.
        #[arg(long, default_value = "1/20")]
        delta: BigRational,
        /// Smoothing order.
        #[arg(long, default_value_t = 5)]
        r: u32,
        /// Use r = ⌊ln nmax⌋ and Δ = nmax^-0.01 instead.
        #[arg(long, conflicts_with_all = ["delta", "r"])]
        paper_params: bool,
    },
    /// I(N)·ln⁵N / N^{3/2} over the residue class.
    Growth,
    /// Sample |S(t)| with major/minor labels.
    ExpsumScan {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON_Q)]
        epsilon_q: f64,
    },
}

struct SieveRow(u64);

impl ReportRow for SieveRow {
    const HEADER: &'static [&'static str] = &["p"];

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.0.into())]
    }
}

enum Outcome {
    Done,
    CheckFailed,
}

impl Global {
    fn config(&self, exponent: FilterExponent, nmin: u64, nmax: u64, default_residue: bool) -> ExperimentConfig {
        let residue = match (self.residue, self.all_residues) {
            (Some(r), _) => Some(r),
            (None, true) => None,
            (None, false) => default_residue.then(Residue::default),
        };
        ExperimentConfig {
            eta: self.eta.clone(),
            window: self.window.clone(),
            exponent,
            nmin: self.nmin.unwrap_or(nmin),
            nmax: self.nmax.unwrap_or(nmax),
            residue,
            tol: self.tol,
            output: self.out.clone(),
            format: self.format,
            seed: self.seed,
        }
    }

    fn write<R: ReportRow>(&self, rows: &[R]) -> Result<()> {
        match &self.out {
            Some(path) => emit_report(rows, self.format, path),
            None => {
                print!("{}", render(rows, self.format));
                Ok(())
            }
        }
    }

    /// Summaries go to stdout when rows went to a file, otherwise to stderr.
    fn summary<S: Serialize>(&self, summary: &S) {
        let text = serde_json::to_string_pretty(summary).expect("summary serializes");
        if self.out.is_some() {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Sieve => {
            let table = sieve(g.nmax.unwrap_or(1_000_000))?;
            let lo = g.nmin.unwrap_or(0);
            let rows: Vec<SieveRow> = table.primes().iter().filter(|&&p| p >= lo).map(|&p| SieveRow(p)).collect();
            g.write(&rows)?;
            g.summary(&serde_json::json!({ "limit": table.limit(), "primes": rows.len() }));
        }
        Command::Special { exponent } => {
            let exponent = FilterExponent::from_u32(exponent)?;
            let limit = num_integer::Roots::sqrt(&g.nmax.unwrap_or(2_000_000));
            let table = sieve(limit.max(2))?;
            let set = special_primes(&table, &g.eta, &g.window, exponent);
            let rows: Vec<PrimeRow> = set
                .members
                .iter()
                .map(|&p| PrimeRow { p, frac: Some(frac_part(&g.eta, exponent.apply(p), 64).to_f64()) })
                .collect();
            g.write(&rows)?;
            g.summary(&serde_json::json!({
                "limit": limit,
                "primes": table.len(),
                "special": set.members.len(),
                "density": fivesquares::primes::density_estimate(&set),
                "window_length": g.window.length_f64(),
            }));
        }
        Command::Count { special, exponent } => {
            let cfg = g.config(FilterExponent::from_u32(exponent)?, 1, 10_000, false);
            cfg.validate()?;
            let table = sieve(num_integer::Roots::sqrt(&cfg.nmax).max(2))?;
            let allowed = if special {
                special_primes(&table, &cfg.eta, &cfg.window, cfg.exponent).members
            } else {
                table.primes().to_vec()
            };
            let counts = count_range(cfg.nmax, &allowed)?;
            let rows: Vec<CountRow> =
                cfg.retained().into_iter().map(|n| CountRow { n, count: counts.get(n) }).collect();
            g.write(&rows)?;
        }
        Command::Sigma => {
            let cfg = g.config(FilterExponent::Square, 1, 1000, false);
            cfg.validate()?;
            let evals = sigma_profile(&cfg.eta, &cfg.window, &cfg.retained(), cfg.tol)?;
            let rows: Vec<SigmaRow> = evals.iter().map(SigmaRow::from).collect();
            g.write(&rows)?;
        }
        Command::Verify => {
            let report = run_verify(&g.config(FilterExponent::Square, 1_000_000, 2_000_000, true))?;
            g.write(&report.rows)?;
            g.summary(&report.summary);
        }
        Command::LinearRemark => {
            let report = run_linear_remark(&g.config(FilterExponent::Linear, 1_000_000, 2_000_000, true))?;
            g.write(&report.rows)?;
            g.summary(&report.summary);
        }
        Command::Sandwich { delta, r, paper_params } => {
            let cfg = g.config(FilterExponent::Square, 1, 100_000, false);
            let (r, delta) = if paper_params { paper_parameters(cfg.nmax) } else { (r, delta) };
            let report = run_sandwich(&cfg, &delta, r)?;
            g.write(&report.rows)?;
            g.summary(&report.summary);
            if report.summary.violations > 0 {
                eprintln!("sandwich violated at {} values of N", report.summary.violations);
                return Ok(Outcome::CheckFailed);
            }
        }
        Command::Growth => {
            let report = run_growth_check(&g.config(FilterExponent::Square, 100_000, 1_000_000, true))?;
            g.write(&report.rows)?;
            if report.summary.zeros > 0 {
                eprintln!("warning: I(N) = 0 for {} retained N", report.summary.zeros);
            }
            g.summary(&report.summary);
        }
        Command::ExpsumScan { samples, epsilon_q } => {
            let n = g.nmax.unwrap_or(1_000_000);
            let rows = minor_arc_scan(n, samples, g.seed, epsilon_q)?;
            g.write(&rows)?;
            let minor: Vec<f64> = rows.iter().filter(|r| r.kind == ArcKind::Minor).map(|r| r.normalized).collect();
            g.summary(&serde_json::json!({
                "N": n,
                "samples": rows.len(),
                "minor": minor.len(),
                "max_normalized_minor": minor.iter().copied().fold(0.0, f64::max),
            }));
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
