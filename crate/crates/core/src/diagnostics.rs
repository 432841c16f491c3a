//! Monte Carlo estimates of the quantities behind the Poisson approximation:
//! single-tuple tails and `λ_p`, the `b1` counting bound, the joint tail
//! `Ψ_n^{(s)}` of two overlapping tuples, and moderate-deviation ratios.
//!
//! Replicate `r` always draws from lane `r` of the caller's [`SeedSpec`], so
//! estimators called with the same seed share random numbers, and hit counts
//! are merged by integer addition independent of thread count.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{lambda_limit, nu_p};
use crate::error::{Error, Result};
use crate::populations::{PopulationSpec, Sampler};
use crate::rng::SeedSpec;
use crate::statcore::tuple_count;

/// Expected-hit counts below which estimates carry an advisory flag.
pub const LAMBDA_MIN_EXPECTED_HITS: f64 = 50.0;
pub const RATIO_MIN_EXPECTED_HITS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub hits: u64,
    pub reps: u64,
    pub std_error: f64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, reps: u64) -> Self {
        let probability = hits as f64 / reps as f64;
        Self {
            probability,
            hits,
            reps,
            std_error: (probability * (1.0 - probability) / reps as f64).sqrt(),
        }
    }
}

/// `1 − Φ(x)` through the complementary error function.
pub fn gaussian_upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// `C(p, m)` as a float, exact whenever it fits in a `u64`.
fn binomial_f64(p: usize, m: usize) -> f64 {
    match tuple_count(p, m) {
        Some(c) => c as f64,
        None => {
            let (p, m) = (p as f64, m as f64);
            (libm::lgamma(p + 1.0) - libm::lgamma(m + 1.0) - libm::lgamma(p - m + 1.0)).exp()
        }
    }
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::param("reps", "must be at least 1"));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::param("m", format!("order must be at least 2, got {m}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    Ok(())
}

/// Runs `reps` replicates of `columns` fresh columns of length `n` and counts,
/// for each threshold, the replicates whose score passes it.
fn count_hits<S, H>(
    sampler: &Sampler,
    seed: SeedSpec,
    reps: u64,
    n: usize,
    columns: usize,
    thresholds: &[f64],
    score: S,
    hit: H,
) -> Vec<u64>
where
    S: Fn(&[f64]) -> f64 + Sync,
    H: Fn(f64, f64) -> bool + Sync,
{
    let zero = || vec![0u64; thresholds.len()];
    (0..reps)
        .into_par_iter()
        .map_init(
            || vec![0.0; n * columns],
            |buf, r| {
                sampler.fill(&mut seed.lane(r), buf);
                score(buf)
            },
        )
        .fold(zero, |mut acc, s| {
            for (a, &t) in acc.iter_mut().zip(thresholds) {
                *a += u64::from(hit(s, t));
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
}

/// `Σ_k Π_{t ∈ factors} buf[t·n + k]`, multiplying factors in order and summing over ascending `k`.
#[inline]
fn product_sum(buf: &[f64], n: usize, factors: std::ops::Range<usize>, prefix: Option<&[f64]>) -> f64 {
    let mut sum = 0.0;
    for k in 0..n {
        let mut prod = match prefix {
            Some(pre) => pre[k],
            None => 1.0,
        };
        for t in factors.clone() {
            prod *= buf[t * n + k];
        }
        sum += prod;
    }
    sum
}

fn single_tail_counts(
    spec: &PopulationSpec,
    n: usize,
    m: usize,
    thresholds: &[f64],
    reps: u64,
    seed: SeedSpec,
) -> Result<Vec<u64>> {
    check_reps(reps)?;
    check_m(m)?;
    check_n(n)?;
    let sampler = spec.sampler()?;
    let scale = (n as f64).sqrt();
    let score = |buf: &[f64]| {
        let mut sum = 0.0;
        for k in 0..n {
            let mut prod = buf[k];
            for t in 1..m {
                prod *= buf[t * n + k];
            }
            sum += prod;
        }
        sum.abs() / scale
    };
    Ok(count_hits(&sampler, seed, reps, n, m, thresholds, score, |s, t| s > t))
}

/// Two-sided single-tuple tail `P(|Σ_{k≤n} ψ_k|/√n > threshold)`, where each
/// `ψ_k` is a product of `m` independent draws.
///
/// A zero threshold is answered exactly with probability 1 and no simulation.
pub fn estimate_single_tail(
    spec: &PopulationSpec,
    n: usize,
    m: usize,
    threshold: f64,
    reps: u64,
    seed: SeedSpec,
) -> Result<TailEstimate> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::param("threshold", format!("must be finite and non-negative, got {threshold}")));
    }
    if threshold == 0.0 {
        check_reps(reps)?;
        return Ok(TailEstimate::from_counts(reps, reps));
    }
    let hits = single_tail_counts(spec, n, m, &[threshold], reps, seed)?;
    Ok(TailEstimate::from_counts(hits[0], reps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub z: f64,
    /// `√(2m)·ν_p(z)` in units of the `√n`-scaled statistic.
    pub threshold: f64,
    pub single_tail: TailEstimate,
    /// `C(p, m) ·` single-tail estimate.
    pub lambda_hat: f64,
    pub lambda_std_error: f64,
    /// `e^{−z/2}`.
    pub lambda_limit: f64,
    /// Fewer than 50 hits expected under the Gaussian tail at this threshold.
    pub low_expected_hits: bool,
}

/// `λ̂_p` for several `z` from one set of replicates (common random numbers).
pub fn estimate_lambda_grid(
    zs: &[f64],
    n: usize,
    p: usize,
    m: usize,
    spec: &PopulationSpec,
    reps: u64,
    seed: SeedSpec,
) -> Result<Vec<LambdaEstimate>> {
    let root = (2.0 * m as f64).sqrt();
    let thresholds = zs
        .iter()
        .map(|&z| Ok(root * nu_p(z, p, m)?))
        .collect::<Result<Vec<f64>>>()?;
    let hits = single_tail_counts(spec, n, m, &thresholds, reps, seed)?;
    let count = binomial_f64(p, m);
    Ok(zs
        .iter()
        .zip(&thresholds)
        .zip(hits)
        .map(|((&z, &threshold), h)| {
            let single_tail = TailEstimate::from_counts(h, reps);
            let expected = reps as f64 * 2.0 * gaussian_upper_tail(threshold);
            LambdaEstimate {
                z,
                threshold,
                single_tail,
                lambda_hat: count * single_tail.probability,
                lambda_std_error: count * single_tail.std_error,
                lambda_limit: lambda_limit(z),
                low_expected_hits: expected < LAMBDA_MIN_EXPECTED_HITS,
            }
        })
        .collect())
}

pub fn estimate_lambda(
    z: f64,
    n: usize,
    p: usize,
    m: usize,
    spec: &PopulationSpec,
    reps: u64,
    seed: SeedSpec,
) -> Result<LambdaEstimate> {
    Ok(estimate_lambda_grid(&[z], n, p, m, spec, reps, seed)?[0])
}

/// Counting bound `b1 ≤ C(p,m) · m² p^{m−1} · P(single tuple exceeds)²`.
pub fn b1_bound(p: usize, m: usize, single_tail: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&single_tail) {
        return Err(Error::param("single_tail", format!("must be a probability, got {single_tail}")));
    }
    let mf = m as f64;
    Ok(binomial_f64(p, m) * mf * mf * (p as f64).powi(m as i32 - 1) * single_tail * single_tail)
}

/// Joint tail of two tuple sums sharing `s` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTailSpec {
    pub s: usize,
    /// `a_n`: both sums must reach `a_n·√(n·log p)` in absolute value.
    pub threshold: f64,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub spec: PopulationSpec,
}

impl PairTailSpec {
    fn validate(&self) -> Result<()> {
        check_m(self.m)?;
        check_n(self.n)?;
        if self.s == 0 || self.s >= self.m {
            return Err(Error::param("s", format!("overlap must lie in 1..={}, got {}", self.m - 1, self.s)));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::param("threshold", format!("must be positive, got {}", self.threshold)));
        }
        if self.p < 3 {
            return Err(Error::param("p", format!("must be at least 3, got {}", self.p)));
        }
        Ok(())
    }

    /// Absolute cut-off `a_n·√(n·log p)` applied to each raw sum.
    pub fn cutoff(&self) -> f64 {
        self.threshold * (self.n as f64 * (self.p as f64).ln()).sqrt()
    }
}

/// `Ψ_n^{(s)}(a_n)`: with `ξ` the product of the `s` shared coordinates, `η`
/// of the remaining `m − s` coordinates of the first tuple and `ζ` of the
/// `m − s` coordinates of the second, estimates
/// `P(|Σ ξη| ≥ a_n√(n log p), |Σ ξζ| ≥ a_n√(n log p))`.
pub fn estimate_pair_tail(spec: &PairTailSpec, reps: u64, seed: SeedSpec) -> Result<TailEstimate> {
    check_reps(reps)?;
    spec.validate()?;
    let sampler = spec.spec.sampler()?;
    let (n, m, s) = (spec.n, spec.m, spec.s);
    let columns = 2 * m - s;
    let cutoff = spec.cutoff();
    let score = |buf: &[f64]| {
        let (mut first, mut second) = (0.0f64, 0.0f64);
        for k in 0..n {
            let mut xi = buf[k];
            for t in 1..s {
                xi *= buf[t * n + k];
            }
            let mut eta = xi;
            for t in s..m {
                eta *= buf[t * n + k];
            }
            let mut zeta = xi;
            for t in m..columns {
                zeta *= buf[t * n + k];
            }
            first += eta;
            second += zeta;
        }
        first.abs().min(second.abs())
    };
    let hits = count_hits(&sampler, seed, reps, n, columns, &[cutoff], score, |v, c| v >= c);
    Ok(TailEstimate::from_counts(hits[0], reps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub x: f64,
    pub p_hat: f64,
    pub hits: u64,
    pub reps: u64,
    pub std_error: f64,
    /// `1 − Φ(x)`.
    pub gaussian_tail: f64,
    pub ratio: f64,
    pub ratio_std_error: f64,
    /// Fewer than 10 hits expected at this `x`.
    pub low_expected_hits: bool,
}

/// One-sided moderate-deviation check: `P(S_n/√n ≥ x) / (1 − Φ(x))` with
/// `S_n = Σ_{k≤n} ψ_k` and `ψ_k` a product of `m` independent draws.
pub fn moderate_deviation_ratio(
    spec: &PopulationSpec,
    m: usize,
    n: usize,
    x: f64,
    reps: u64,
    seed: SeedSpec,
) -> Result<RatioReport> {
    check_reps(reps)?;
    check_m(m)?;
    check_n(n)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::param("x", format!("must be finite and non-negative, got {x}")));
    }
    let sampler = spec.sampler()?;
    let scale = (n as f64).sqrt();
    let score = |buf: &[f64]| product_sum(buf, n, 1..m, Some(&buf[..n])) / scale;
    let hits = count_hits(&sampler, seed, reps, n, m, &[x], score, |v, t| v >= t)[0];
    let est = TailEstimate::from_counts(hits, reps);
    let gaussian_tail = gaussian_upper_tail(x);
    Ok(RatioReport {
        x,
        p_hat: est.probability,
        hits,
        reps,
        std_error: est.std_error,
        gaussian_tail,
        ratio: est.probability / gaussian_tail,
        ratio_std_error: est.std_error / gaussian_tail,
        low_expected_hits: reps as f64 * gaussian_tail < RATIO_MIN_EXPECTED_HITS,
    })
}

/// Decay rates of `Ψ_n^{(s)}` implied by the two regimes, evaluated at `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRates {
    /// `√(2m)·ν_p / √(log p)`, the level used by the Poisson argument.
    pub theorem_a_n: f64,
    /// `p^{−a²}` at the simulated threshold `a` (sub-exponential regime, up to `p^ε`).
    pub ultra_high_rate: f64,
    /// `p^{−2m}` (polynomial regime, up to `p^δ`).
    pub polynomial_rate: f64,
    /// `√(2m / log n)·ν_p`.
    pub c_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinChenReport {
    pub z: f64,
    pub lambda_hat: f64,
    pub lambda_limit: f64,
    pub single_tail: TailEstimate,
    pub b1_bound: f64,
    /// `C(p,m) · Σ_s m^s p^{m−s} · Ψ̂^{(s)}` at the simulated pair threshold.
    pub b2_bound: f64,
    pub psi_threshold: f64,
    pub psi_estimates: BTreeMap<usize, TailEstimate>,
    pub analytic: AnalyticRates,
    pub n: usize,
    pub p: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinChenConfig {
    pub z: f64,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub spec: PopulationSpec,
    pub reps: u64,
    /// `a` for the pair-tail estimates. The theorem's own level (≈ √(2m))
    /// gives probabilities far below what plain Monte Carlo can resolve.
    pub psi_threshold: f64,
    pub psi_reps: u64,
}

/// λ̂, the b1 bound and `Ψ̂^{(s)}` for every overlap `s`, with the analytic
/// decay rates alongside.
pub fn stein_chen_report(cfg: &SteinChenConfig, seed: SeedSpec) -> Result<SteinChenReport> {
    let lam = estimate_lambda(cfg.z, cfg.n, cfg.p, cfg.m, &cfg.spec, cfg.reps, seed)?;
    let b1 = b1_bound(cfg.p, cfg.m, lam.single_tail.probability)?;
    let mut psi_estimates = BTreeMap::new();
    let mut b2_sum = 0.0;
    for s in 1..cfg.m {
        let pair = PairTailSpec {
            s,
            threshold: cfg.psi_threshold,
            n: cfg.n,
            p: cfg.p,
            m: cfg.m,
            spec: cfg.spec.clone(),
        };
        // disjoint stream per overlap
        let est = estimate_pair_tail(&pair, cfg.psi_reps, SeedSpec::new(seed.master_seed, seed.stream_id ^ ((s as u64) << 32)))?;
        b2_sum += (cfg.m as f64).powi(s as i32) * (cfg.p as f64).powi((cfg.m - s) as i32) * est.probability;
        psi_estimates.insert(s, est);
    }
    let log_p = (cfg.p as f64).ln();
    let nu = nu_p(cfg.z, cfg.p, cfg.m)?;
    let root = (2.0 * cfg.m as f64).sqrt();
    let pf = cfg.p as f64;
    Ok(SteinChenReport {
        z: cfg.z,
        lambda_hat: lam.lambda_hat,
        lambda_limit: lam.lambda_limit,
        single_tail: lam.single_tail,
        b1_bound: b1,
        b2_bound: binomial_f64(cfg.p, cfg.m) * b2_sum,
        psi_threshold: cfg.psi_threshold,
        psi_estimates,
        analytic: AnalyticRates {
            theorem_a_n: root * nu / log_p.sqrt(),
            ultra_high_rate: pf.powf(-cfg.psi_threshold * cfg.psi_threshold),
            polynomial_rate: pf.powf(-2.0 * cfg.m as f64),
            c_n: (2.0 * cfg.m as f64 / (cfg.n as f64).ln()).sqrt() * nu,
        },
        n: cfg.n,
        p: cfg.p,
        m: cfg.m,
    })
}
