//! Seeded Monte Carlo replication of the coin tossing experiments.
//!
//! Replications are embarrassingly parallel and deterministic: replication
//! `i` draws its bits from an independent ChaCha substream derived from
//! `(seed, i)`, so reports are bit-identical for a fixed seed regardless
//! of the worker count. Sequences are never materialized for the long
//! experiments; bits stream straight into the scanners.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::run_scan::{BitSequence, RunParams, StreamScanner};
use crate::theory::{self, CenteringResult, CoinSpec};
use crate::Result;

/// One experiment campaign: `s` independent repetitions of `N` tosses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Tosses per experiment.
    pub n: u64,
    /// Number of replications.
    pub s: u64,
    /// Contamination count.
    pub t: u32,
    pub coin: CoinSpec,
    pub seed: u64,
    /// Window length for hitting-time experiments.
    pub m_hit: Option<u32>,
    /// Hitting replications are censored after this many mean lifetimes.
    pub cap_mean_lifetimes: f64,
}

/// Default censoring cap for hitting experiments, in units of the mean
/// hitting time. At 50 lifetimes the censoring probability is ~e^-50.
pub const DEFAULT_CAP_MEAN_LIFETIMES: f64 = 50.0;

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::InvalidSimulationConfig {
                reason: "need at least one replication".into(),
            });
        }
        let qn = self.coin.q() * self.n as f64;
        if qn <= 1.0 {
            return Err(Error::IteratedLogDomain { qn });
        }
        if let Some(m) = self.m_hit {
            if u64::from(m) > self.n {
                return Err(Error::InvalidSimulationConfig {
                    reason: format!("hitting window m = {m} exceeds N = {}", self.n),
                });
            }
        }
        if !(self.cap_mean_lifetimes > 0.0) {
            return Err(Error::InvalidSimulationConfig {
                reason: "censoring cap must be positive".into(),
            });
        }
        Ok(())
    }
}

/// RNG for one replication: a fixed seed keys the cipher, the replication
/// index selects the stream. Identical `(seed, replication)` always yields
/// identical bits, independent of threading.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// One Bernoulli(p) toss: 1 = heads.
#[inline]
pub fn sample_bit<R: Rng + ?Sized>(rng: &mut R, coin: &CoinSpec) -> u8 {
    u8::from(rng.random::<f64>() < coin.p())
}

/// Materialize `n` i.i.d. tosses. Long experiments should stream via
/// [`sample_bit`] instead.
pub fn generate_sequence<R: Rng + ?Sized>(rng: &mut R, n: u64, coin: &CoinSpec) -> BitSequence {
    BitSequence::from_bools((0..n).map(|_| sample_bit(rng, coin) == 1))
}

/// Integer- or real-supported probability mass from replicated
/// experiments: sorted distinct values with per-point tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    support: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    lattice: bool,
}

impl EmpiricalDistribution {
    pub fn from_integers(samples: impl IntoIterator<Item = i64>) -> Self {
        let mut xs: Vec<i64> = samples.into_iter().collect();
        xs.sort_unstable();
        let (support, counts) = group_sorted(xs.iter().map(|&x| x as f64));
        let total = counts.iter().sum();
        Self {
            support,
            counts,
            total,
            lattice: true,
        }
    }

    pub fn from_reals(samples: impl IntoIterator<Item = f64>) -> Self {
        let mut xs: Vec<f64> = samples.into_iter().filter(|x| x.is_finite()).collect();
        xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let (support, counts) = group_sorted(xs.into_iter());
        let total = counts.iter().sum();
        Self {
            support,
            counts,
            total,
            lattice: false,
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Integer lattice (longest-run) or real (scaled hitting time) support.
    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `P(X < x)`.
    pub fn cdf_below(&self, x: f64) -> f64 {
        let mut acc = 0u64;
        for (v, c) in self.support.iter().zip(&self.counts) {
            if *v < x {
                acc += c;
            } else {
                break;
            }
        }
        acc as f64 / self.total as f64
    }

    /// `P(X <= x)`.
    pub fn cdf_at_most(&self, x: f64) -> f64 {
        let mut acc = 0u64;
        for (v, c) in self.support.iter().zip(&self.counts) {
            if *v <= x {
                acc += c;
            } else {
                break;
            }
        }
        acc as f64 / self.total as f64
    }
}

fn group_sorted(xs: impl Iterator<Item = f64>) -> (Vec<f64>, Vec<u64>) {
    let mut support = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for x in xs {
        if support.last() == Some(&x) {
            *counts.last_mut().unwrap() += 1;
        } else {
            support.push(x);
            counts.push(1);
        }
    }
    (support, counts)
}

/// Which theoretical distribution a Kolmogorov report was scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryKind {
    /// Classical accompanying distribution, centered by `[m0(N)]`.
    Old,
    /// Corrected accompanying distribution, centered by `[m(N)]`.
    New,
    /// The standard exponential limit `1 - e^(-x)`.
    ExpLimit,
}

/// One comparison point of the Kolmogorov table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub value: f64,
    /// Empirical `P(X < value)`.
    pub ecdf_lower: f64,
    /// Empirical `P(X <= value)`.
    pub ecdf_upper: f64,
    /// Theoretical `P(X <= value)`.
    pub tcdf: f64,
    pub gap: f64,
}

/// Kolmogorov distance between an empirical distribution and a
/// theoretical CDF, with the per-point comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub distance: f64,
    pub which_theory: TheoryKind,
    pub table: Vec<KsRow>,
}

/// Sup-norm gap between the empirical CDF and `theory_cdf`, where
/// `theory_cdf(v)` is the theoretical `P(X <= v)` (right-continuous).
///
/// Integer-lattice distributions are compared at every lattice point
/// spanning the support (the theory is a lattice law there too); real
/// samples are compared against a continuous CDF at both the left and
/// right limits of each empirical step.
pub fn ks_distance(
    emp: &EmpiricalDistribution,
    theory_cdf: impl Fn(f64) -> f64,
    which_theory: TheoryKind,
) -> Result<KsReport> {
    if emp.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let total = emp.total() as f64;
    let mut table = Vec::new();
    let mut distance = 0.0f64;

    if emp.is_lattice() {
        let min = emp.support().first().unwrap().round() as i64;
        let max = emp.support().last().unwrap().round() as i64;
        let mut acc = 0u64;
        let mut idx = 0usize;
        for k in (min - 1)..=max {
            let ecdf_lower = acc as f64 / total;
            if idx < emp.support().len() && emp.support()[idx].round() as i64 == k {
                acc += emp.counts()[idx];
                idx += 1;
            }
            let ecdf_upper = acc as f64 / total;
            let tcdf = theory_cdf(k as f64);
            let gap = (ecdf_upper - tcdf).abs();
            distance = distance.max(gap);
            table.push(KsRow {
                value: k as f64,
                ecdf_lower,
                ecdf_upper,
                tcdf,
                gap,
            });
        }
    } else {
        let mut acc = 0u64;
        for (v, c) in emp.support().iter().zip(emp.counts()) {
            let ecdf_lower = acc as f64 / total;
            acc += c;
            let ecdf_upper = acc as f64 / total;
            let tcdf = theory_cdf(*v);
            let gap = (ecdf_lower - tcdf).abs().max((ecdf_upper - tcdf).abs());
            distance = distance.max(gap);
            table.push(KsRow {
                value: *v,
                ecdf_lower,
                ecdf_upper,
                tcdf,
                gap,
            });
        }
    }

    Ok(KsReport {
        distance,
        which_theory,
        table,
    })
}

/// Dvoretzky-Kiefer-Wolfowitz half-width: with probability at least
/// `1 - delta` the empirical CDF of `s` samples stays within this band
/// of the truth.
pub fn dkw_band(s: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * s as f64)).sqrt()
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidSimulationConfig {
            reason: format!("worker pool: {e}"),
        })
}

/// Longest at-most-`T` run of each replication, by streaming scan.
fn mu_samples(cfg: &SimulationConfig, workers: usize) -> Result<Vec<u64>> {
    let pool = worker_pool(workers)?;
    let samples = pool.install(|| {
        (0..cfg.s)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(cfg.seed, rep);
                let mut scanner = StreamScanner::new(cfg.t);
                for _ in 0..cfg.n {
                    scanner.push(sample_bit(&mut rng, &cfg.coin));
                }
                scanner.longest()
            })
            .collect::<Vec<u64>>()
    });
    Ok(samples)
}

/// Distribution of `mu(N) - [m(N)]` over `s` replications.
pub fn run_longest_experiment(
    cfg: &SimulationConfig,
    workers: usize,
) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    let center = theory::m_center(cfg.n, cfg.t, &cfg.coin)?;
    let samples = mu_samples(cfg, workers)?;
    Ok(EmpiricalDistribution::from_integers(
        samples.iter().map(|&mu| mu as i64 - center.integer_part),
    ))
}

/// One simulation pass scored against both accompanying distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongestComparison {
    pub ks_new: KsReport,
    pub ks_old: KsReport,
    /// Raw (uncentered) longest-run lengths.
    pub mu: EmpiricalDistribution,
    pub center_new: CenteringResult,
    pub center_old: CenteringResult,
}

/// Run the longest-run experiment once and score the empirical law
/// against the corrected CDF (centered by `[m(N)]`) and the classical
/// one (centered by `[m0(N)]`).
pub fn compare_new_old(cfg: &SimulationConfig, workers: usize) -> Result<LongestComparison> {
    cfg.validate()?;
    let center_new = theory::m_center(cfg.n, cfg.t, &cfg.coin)?;
    let center_old = theory::m0_center(cfg.n, cfg.t, &cfg.coin)?;
    let samples = mu_samples(cfg, workers)?;
    let mu = EmpiricalDistribution::from_integers(samples.iter().map(|&v| v as i64));

    let recentered_new = EmpiricalDistribution::from_integers(
        samples.iter().map(|&v| v as i64 - center_new.integer_part),
    );
    let recentered_old = EmpiricalDistribution::from_integers(
        samples.iter().map(|&v| v as i64 - center_old.integer_part),
    );

    // The theoretical lattice CDFs: P(X <= k) = P(X < k+1).
    let (n, t, coin) = (cfg.n, cfg.t, cfg.coin);
    let ks_new = ks_distance(
        &recentered_new,
        |k| theory::accompanying_cdf_new(k as i64 + 1, n, t, &coin).unwrap_or(f64::NAN),
        TheoryKind::New,
    )?;
    let ks_old = ks_distance(
        &recentered_old,
        |k| theory::accompanying_cdf_old(k as i64 + 1, n, t, &coin).unwrap_or(f64::NAN),
        TheoryKind::Old,
    )?;

    Ok(LongestComparison {
        ks_new,
        ks_old,
        mu,
        center_new,
        center_old,
    })
}

/// First hitting time of the exactly-`T` window over a capped bit stream;
/// `None` when the cap is reached first (a censored replication).
pub fn scan_hitting_capped(
    bits: impl IntoIterator<Item = u8>,
    params: &RunParams,
    cap: u64,
) -> Option<u64> {
    let mut scanner = StreamScanner::new(params.t());
    scanner
        .register_hitting_window(params.m())
        .expect("fresh scanner");
    for b in bits.into_iter().take(cap as usize) {
        scanner.push(b);
        if let Some(tau) = scanner.hitting_time(params.m()) {
            return Some(tau);
        }
    }
    None
}

/// Scaled hitting-time sample with its exponential-limit comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingOutcome {
    /// Empirical distribution of `tau_m * alpha * P(A_1)`.
    pub sample: EmpiricalDistribution,
    pub ks: KsReport,
    /// Replications that never hit within the cap.
    pub censored: u64,
    /// The cap, in tosses.
    pub cap: u64,
    /// The normalizing rate `alpha * P(A_1)`.
    pub scale: f64,
}

/// Replicated first-hitting-time experiment for the configured window,
/// scored against the standard exponential limit.
pub fn run_hitting_experiment(cfg: &SimulationConfig, workers: usize) -> Result<HittingOutcome> {
    cfg.validate()?;
    let m = cfg.m_hit.ok_or_else(|| Error::InvalidSimulationConfig {
        reason: "hitting experiment needs m_hit".into(),
    })?;
    let scale = theory::tau_scale(m, cfg.t, &cfg.coin, false)?;
    let cap = (cfg.cap_mean_lifetimes / scale).ceil() as u64;
    let params = RunParams::new(cfg.t, m)?;

    let pool = worker_pool(workers)?;
    let taus = pool.install(|| {
        (0..cfg.s)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(cfg.seed, rep);
                scan_hitting_capped(
                    std::iter::from_fn(|| Some(sample_bit(&mut rng, &cfg.coin))),
                    &params,
                    cap,
                )
            })
            .collect::<Vec<Option<u64>>>()
    });

    let censored = taus.iter().filter(|t| t.is_none()).count() as u64;
    let sample = EmpiricalDistribution::from_reals(
        taus.iter().flatten().map(|&tau| tau as f64 * scale),
    );
    if sample.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let ks = ks_distance(
        &sample,
        |x| if x < 0.0 { 0.0 } else { 1.0 - (-x).exp() },
        TheoryKind::ExpLimit,
    )?;
    Ok(HittingOutcome {
        sample,
        ks,
        censored,
        cap,
        scale,
    })
}
