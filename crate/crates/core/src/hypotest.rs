//! Asymptotic test of coordinate independence based on the largest tensor entry.
//!
//! Inputs are assumed standardized (mean 0, variance 1 per coordinate); no
//! studentization happens here.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{normalize, GumbelLimit, Sidedness};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::populations::{check_regime, AssumptionProfile, RegimeReport};
use crate::statcore::{
    max_entry_multi_with, max_entry_with, EnumerationOptions, MultiSampleInput, StatResult,
};

/// Nominal levels with a reported decision.
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub level: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub stat: StatResult,
    pub sided: Sidedness,
    pub t_value: f64,
    pub p_value: f64,
    pub decisions: Vec<Decision>,
    /// One-sided tests only: the signed maximum was not positive, so the
    /// statistic was clamped to 0 before normalizing.
    pub signed_nonpositive: bool,
    pub regime: RegimeReport,
}

#[derive(Debug, Clone, Copy)]
pub struct TestOptions {
    pub sided: Sidedness,
    pub enumeration: EnumerationOptions,
    /// Profile used for the advisory regime report; `None` uses unit exponents.
    pub profile: Option<AssumptionProfile>,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            sided: Sidedness::TwoSided,
            enumeration: EnumerationOptions::default(),
            profile: None,
        }
    }
}

impl TestOptions {
    pub fn sided(sided: Sidedness) -> Self {
        Self {
            sided,
            ..Self::default()
        }
    }
}

/// p-value of a statistic `w` (≥ 0) against the limit law for `(p, m, sided)`.
pub fn p_value(w: f64, n: usize, p: usize, m: usize, sided: Sidedness) -> Result<(f64, f64)> {
    let t = normalize(w, n, p, m)?.t_value;
    let limit = GumbelLimit::new(m, sided)?;
    Ok((t, limit.sf(t)))
}

fn conclude(stat: StatResult, opts: &TestOptions) -> Result<TestResult> {
    let (n, p, m) = (stat.n, stat.p, stat.m);
    if p < 3 {
        return Err(Error::Domain(format!("p must be at least 3, got {p}")));
    }
    let (w, signed_nonpositive) = match opts.sided {
        Sidedness::TwoSided => (stat.w_abs, false),
        Sidedness::OneSided => (stat.w_signed.max(0.0), stat.w_signed <= 0.0),
    };
    let (t_value, p_value) = p_value(w, n, p, m, opts.sided)?;
    let decisions = LEVELS
        .iter()
        .map(|&level| Decision {
            level,
            reject: p_value < level,
        })
        .collect();
    let profile = match opts.profile {
        Some(pr) => pr,
        None => AssumptionProfile::unit(m)?,
    };
    Ok(TestResult {
        regime: check_regime(n as u64, p as f64, &profile),
        stat,
        sided: opts.sided,
        t_value,
        p_value,
        decisions,
        signed_nonpositive,
    })
}

pub fn test_independence(x: &DataMatrix, m: usize, opts: &TestOptions) -> Result<TestResult> {
    if x.p() < 3 {
        return Err(Error::Domain(format!("p must be at least 3, got {}", x.p())));
    }
    let stat = max_entry_with(x, m, &opts.enumeration)?;
    conclude(stat, opts)
}

pub fn test_independence_multi(input: &MultiSampleInput, opts: &TestOptions) -> Result<TestResult> {
    if input.p() < 3 {
        return Err(Error::Domain(format!("p must be at least 3, got {}", input.p())));
    }
    let stat = max_entry_multi_with(input, &opts.enumeration)?;
    conclude(stat, opts)
}
