//! Standardized i.i.d. populations and the regime conditions of the limit theorems.
//!
//! Every family has mean exactly 0 and variance exactly 1; standardization is
//! analytic, never estimated from the draws.

use std::fmt;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::matrix::DataMatrix;
pub use crate::rng::SeedSpec;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    StandardNormal,
    Rademacher,
    /// `√3 · U(−1, 1)`
    UniformScaled,
    /// `Exp(1) − 1`
    CenteredExponential,
    /// `t_df / √(df / (df − 2))`. Polynomial tails: violates the
    /// sub-exponential moment condition on purpose.
    StudentTStandardized { df: u32 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::StandardNormal => "StandardNormal",
            Family::Rademacher => "Rademacher",
            Family::UniformScaled => "UniformScaled",
            Family::CenteredExponential => "CenteredExponential",
            Family::StudentTStandardized { .. } => "StudentTStandardized",
        }
    }
}

/// A population family plus a free-form label used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PopulationRepr", into = "PopulationRepr")]
pub struct PopulationSpec {
    pub family: Family,
    pub label: String,
}

#[derive(Serialize, Deserialize)]
struct PopulationRepr {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    df: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl TryFrom<PopulationRepr> for PopulationSpec {
    type Error = Error;

    fn try_from(r: PopulationRepr) -> Result<Self> {
        let family = match (r.family.as_str(), r.df) {
            ("StandardNormal", None) => Family::StandardNormal,
            ("Rademacher", None) => Family::Rademacher,
            ("UniformScaled", None) => Family::UniformScaled,
            ("CenteredExponential", None) => Family::CenteredExponential,
            ("StudentTStandardized", Some(df)) => Family::StudentTStandardized { df },
            ("StudentTStandardized", None) => {
                return Err(Error::param("df", "StudentTStandardized requires `df`"))
            }
            (
                "StandardNormal" | "Rademacher" | "UniformScaled" | "CenteredExponential",
                Some(_),
            ) => {
                return Err(Error::param(
                    "df",
                    format!("`df` is only valid for StudentTStandardized, not {}", r.family),
                ))
            }
            (other, _) => {
                return Err(Error::param("family", format!("unknown family `{other}`")))
            }
        };
        let spec = match r.label {
            Some(label) => PopulationSpec { family, label },
            None => PopulationSpec::new(family),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<PopulationSpec> for PopulationRepr {
    fn from(s: PopulationSpec) -> Self {
        let df = match s.family {
            Family::StudentTStandardized { df } => Some(df),
            _ => None,
        };
        let label = (s.label != default_label(&s.family)).then_some(s.label);
        PopulationRepr {
            family: s.family.name().to_string(),
            df,
            label,
        }
    }
}

fn default_label(family: &Family) -> String {
    match family {
        Family::StudentTStandardized { df } => format!("StudentTStandardized(df={df})"),
        f => f.name().to_string(),
    }
}

impl PopulationSpec {
    pub fn new(family: Family) -> Self {
        Self {
            label: default_label(&family),
            family,
        }
    }

    pub fn standard_normal() -> Self {
        Self::new(Family::StandardNormal)
    }

    pub fn rademacher() -> Self {
        Self::new(Family::Rademacher)
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::StudentTStandardized { df } = self.family {
            if df <= 2 {
                return Err(Error::param(
                    "df",
                    format!("StudentTStandardized needs df > 2 for finite variance, got {df}"),
                ));
            }
        }
        Ok(())
    }

    /// Analytic `(mean, variance)`; `(0, 1)` for every supported family.
    pub fn moments(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let kind = match self.family {
            Family::StandardNormal => SamplerKind::Normal,
            Family::Rademacher => SamplerKind::Rademacher,
            Family::UniformScaled => SamplerKind::Uniform,
            Family::CenteredExponential => SamplerKind::Exponential,
            Family::StudentTStandardized { df } => {
                let df = f64::from(df);
                let dist = StudentT::new(df).map_err(|e| Error::param("df", e.to_string()))?;
                SamplerKind::StudentT {
                    dist,
                    scale: ((df - 2.0) / df).sqrt(),
                }
            }
        };
        Ok(Sampler { kind })
    }
}

impl fmt::Display for PopulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Draws standardized values for one [`PopulationSpec`].
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Normal,
    Rademacher,
    Uniform,
    Exponential,
    StudentT { dist: StudentT<f64>, scale: f64 },
}

impl Sampler {
    /// Fills `out` with consecutive i.i.d. draws from `rng`.
    pub fn fill<R: RngCore>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            SamplerKind::Normal => {
                for v in out.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
            }
            SamplerKind::Rademacher => {
                // one sign per bit
                for chunk in out.chunks_mut(64) {
                    let bits = rng.next_u64();
                    for (j, v) in chunk.iter_mut().enumerate() {
                        *v = if (bits >> j) & 1 == 1 { 1.0 } else { -1.0 };
                    }
                }
            }
            SamplerKind::Uniform => {
                for v in out.iter_mut() {
                    let u: f64 = rng.random();
                    *v = SQRT_3 * (2.0 * u - 1.0);
                }
            }
            SamplerKind::Exponential => {
                for v in out.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *v = e - 1.0;
                }
            }
            SamplerKind::StudentT { dist, scale } => {
                for v in out.iter_mut() {
                    *v = dist.sample(rng) * scale;
                }
            }
        }
    }
}

/// Draws an `n × p` matrix of i.i.d. standardized values.
///
/// Column `i` is produced by lane `i` of `seed`, so entry `(k, i)` depends only
/// on `(seed, k, i)` and the result is identical under any thread count.
pub fn sample_matrix(spec: &PopulationSpec, n: usize, p: usize, seed: SeedSpec) -> Result<DataMatrix> {
    if p < 3 {
        return Err(Error::Dimension(format!("p must be at least 3, got {p}")));
    }
    if n == 0 {
        return Err(Error::Dimension("n must be at least 1".into()));
    }
    let sampler = spec.sampler()?;
    let columns: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut col = vec![0.0; n];
            sampler.fill(&mut seed.lane(i as u64), &mut col);
            col
        })
        .collect();
    DataMatrix::from_column_major(n, p, columns.concat())
}

/// Moment/growth exponents of the two limit theorems for a fixed order `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionProfile {
    pub m: usize,
    /// Exponent α ∈ (0, 1] of the sub-exponential condition `E exp(t0 |x|^α) < ∞`.
    pub tail_exponent: f64,
    pub t0: f64,
    /// Exponent α > 0 of the polynomial growth condition `p = O(n^α)`.
    pub growth_exponent: f64,
    /// `α / (2m − α)` from the tail exponent.
    pub beta: f64,
    /// `4mα + 2` from the growth exponent.
    pub tau1: f64,
    /// `2mα + 3/2` from the growth exponent.
    pub tau2: f64,
}

impl AssumptionProfile {
    pub fn new(m: usize, tail_exponent: f64, t0: f64, growth_exponent: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::param("m", format!("order must be at least 2, got {m}")));
        }
        if !(tail_exponent > 0.0 && tail_exponent <= 1.0) {
            return Err(Error::param("tail_exponent", "must lie in (0, 1]"));
        }
        if !(t0 > 0.0) {
            return Err(Error::param("t0", "must be positive"));
        }
        if !(growth_exponent > 0.0) {
            return Err(Error::param("growth_exponent", "must be positive"));
        }
        let mf = m as f64;
        Ok(Self {
            m,
            tail_exponent,
            t0,
            growth_exponent,
            beta: tail_exponent / (2.0 * mf - tail_exponent),
            tau1: 4.0 * mf * growth_exponent + 2.0,
            tau2: 2.0 * mf * growth_exponent + 1.5,
        })
    }

    /// Profile with both exponents equal to 1 and `t0 = 1`.
    pub fn unit(m: usize) -> Result<Self> {
        Self::new(m, 1.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    UltraHigh,
    Polynomial,
    Outside,
}

/// Advisory classification of `(n, p)` against both theorems' growth conditions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub ultra_high: bool,
    pub polynomial: bool,
    pub log_p: f64,
    pub n_pow_beta: f64,
    pub n_pow_alpha: f64,
    pub beta: f64,
    pub tau1: f64,
    pub tau2: f64,
}

/// Classifies `(n, p)`: ultra-high if `log p ≤ n^β`, else polynomial if
/// `p ≤ n^α`, else outside. Never fails; `p` is real so that astronomically
/// large dimensions can be described.
pub fn check_regime(n: u64, p: f64, profile: &AssumptionProfile) -> RegimeReport {
    let nf = n as f64;
    let log_p = p.ln();
    let n_pow_beta = nf.powf(profile.beta);
    let n_pow_alpha = nf.powf(profile.growth_exponent);
    let ultra_high = log_p <= n_pow_beta;
    let polynomial = log_p <= profile.growth_exponent * nf.ln();
    let regime = if ultra_high {
        Regime::UltraHigh
    } else if polynomial {
        Regime::Polynomial
    } else {
        Regime::Outside
    };
    RegimeReport {
        regime,
        ultra_high,
        polynomial,
        log_p,
        n_pow_beta,
        n_pow_alpha,
        beta: profile.beta,
        tau1: profile.tau1,
        tau2: profile.tau2,
    }
}
