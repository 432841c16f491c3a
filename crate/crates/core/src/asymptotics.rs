//! The Gumbel-type limit law of the normalized maximum.
//!
//! With `T_n = W_n² − 2m·log p + log log p`, the two-sided statistic has limit
//! `F_θ(z) = exp(−c·e^{−z/2})` with `c = 1/(m!·√(mπ))`; the signed statistic
//! has the same form with half the constant. All logarithms are natural.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order for which `m!` is evaluated directly in double precision.
pub const MAX_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// `W_n`: maximum of absolute entries.
    #[default]
    TwoSided,
    /// `W̃_n`: maximum of signed entries.
    OneSided,
}

impl std::str::FromStr for Sidedness {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "two_sided" => Ok(Sidedness::TwoSided),
            "one" | "one_sided" => Ok(Sidedness::OneSided),
            other => Err(Error::param("sided", format!("expected `two` or `one`, got `{other}`"))),
        }
    }
}

fn check_order(m: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&m) {
        return Err(Error::param("m", format!("order must be in 2..={MAX_ORDER}, got {m}")));
    }
    Ok(())
}

fn factorial(m: usize) -> f64 {
    (1..=m as u64).product::<u64>() as f64
}

/// `log(m!·√(mπ))` via log-gamma.
pub fn log_rate_denominator(m: usize) -> f64 {
    libm::lgamma(m as f64 + 1.0) + 0.5 * (m as f64 * PI).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelLimit {
    pub m: usize,
    pub sided: Sidedness,
    /// Rate constant `c` in `exp(−c·e^{−z/2})`.
    pub c: f64,
}

impl GumbelLimit {
    pub fn new(m: usize, sided: Sidedness) -> Result<Self> {
        check_order(m)?;
        let two_sided = 1.0 / (factorial(m) * (m as f64 * PI).sqrt());
        let c = match sided {
            Sidedness::TwoSided => two_sided,
            Sidedness::OneSided => two_sided / 2.0,
        };
        Ok(Self { m, sided, c })
    }

    pub fn two_sided(m: usize) -> Result<Self> {
        Self::new(m, Sidedness::TwoSided)
    }

    pub fn one_sided(m: usize) -> Result<Self> {
        Self::new(m, Sidedness::OneSided)
    }

    pub fn cdf(&self, z: f64) -> f64 {
        (-self.c * lambda_limit(z)).exp()
    }

    /// `1 − cdf(z)`, computed without cancellation.
    pub fn sf(&self, z: f64) -> f64 {
        -(-self.c * lambda_limit(z)).exp_m1()
    }

    /// Closed-form inverse: `z = −2·log(−log(q)/c)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level `q` must lie in (0, 1), got {q}")));
        }
        Ok(-2.0 * (-q.ln() / self.c).ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedStat {
    pub t_value: f64,
    pub w: f64,
    pub n: usize,
    pub p: usize,
    pub m: usize,
}

fn check_dimension(p: usize) -> Result<()> {
    if p < 3 {
        return Err(Error::Domain(format!(
            "p must be at least 3 so that log log p > 0, got {p}"
        )));
    }
    Ok(())
}

/// `T_n = w² − 2m·log p + log log p`.
pub fn normalize(w: f64, n: usize, p: usize, m: usize) -> Result<NormalizedStat> {
    check_dimension(p)?;
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("statistic must be finite and non-negative, got {w}")));
    }
    let log_p = (p as f64).ln();
    Ok(NormalizedStat {
        t_value: w * w - 2.0 * m as f64 * log_p + log_p.ln(),
        w,
        n,
        p,
        m,
    })
}

/// `ν_p = [log p − (log log p + 2·log(m!√(mπ)) − z)/(2m)]^{1/2}`.
///
/// `P(W_n ≤ √(2m)·ν_p)` tends to `exp(−e^{−z/2})`; the normalized value at that
/// threshold is `z − 2·log(m!√(mπ))`.
pub fn nu_p(z: f64, p: usize, m: usize) -> Result<f64> {
    check_dimension(p)?;
    check_order(m)?;
    let log_p = (p as f64).ln();
    let radicand =
        log_p - (log_p.ln() + 2.0 * log_rate_denominator(m) - z) / (2.0 * m as f64);
    if !(radicand > 0.0) {
        return Err(Error::Domain(format!(
            "nu_p radicand is {radicand} for z = {z}, p = {p}, m = {m}; it must be positive"
        )));
    }
    Ok(radicand.sqrt())
}

/// Limit `e^{−z/2}` of the Poisson intensity `λ_p`.
pub fn lambda_limit(z: f64) -> f64 {
    (-z / 2.0).exp()
}

/// Probability limit `√(2m)` of `W_n/√(log p)`.
pub fn ratio_target(m: usize) -> f64 {
    (2.0 * m as f64).sqrt()
}
