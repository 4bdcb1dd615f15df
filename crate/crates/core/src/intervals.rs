//! Confidence intervals for a binomial proportion and their exact coverage.
//!
//! Jeffreys intervals are plain equal-tailed quantiles of the
//! `Beta(x + 1/2, k − x + 1/2)` posterior, with no special handling at
//! `x = 0` or `x = k`.

use std::fmt;
use std::str::FromStr;

use crate::bounds::log_two_over_alpha;
use crate::error::{domain, Error, Result};
use crate::specfun::{inv_reg_inc_beta_unchecked, ln_binomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Hoeffding,
    ClopperPearson,
    Jeffreys,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hoeffding, Method::ClopperPearson, Method::Jeffreys];

    pub fn label(self) -> &'static str {
        match self {
            Method::Hoeffding => "hoeffding",
            Method::ClopperPearson => "clopper_pearson",
            Method::Jeffreys => "jeffreys",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| domain("method", format!("unknown interval method `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinomialInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub alpha: f64,
    pub x: u64,
    pub k: u64,
}

impl BinomialInterval {
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check(x: u64, k: u64, alpha: f64) -> Result<()> {
    if k == 0 {
        return Err(domain("k", "at least one trial is required"));
    }
    if x > k {
        return Err(domain("x", format!("successes {x} exceed trials {k}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `x/k ± √(log(2/α) / (2k))`, clipped to `[0, 1]`.
pub fn hoeffding_interval(x: u64, k: u64, alpha: f64) -> Result<BinomialInterval> {
    check(x, k, alpha)?;
    let center = x as f64 / k as f64;
    let half = (log_two_over_alpha(alpha) / (2.0 * k as f64)).sqrt();
    Ok(BinomialInterval {
        lower: (center - half).clamp(0.0, 1.0),
        upper: (center + half).clamp(0.0, 1.0),
        method: Method::Hoeffding,
        alpha,
        x,
        k,
    })
}

/// Exact (Clopper–Pearson) interval from Beta quantiles.
pub fn clopper_pearson(x: u64, k: u64, alpha: f64) -> Result<BinomialInterval> {
    check(x, k, alpha)?;
    let (xf, kf) = (x as f64, k as f64);
    let lower = if x == 0 {
        0.0
    } else {
        inv_reg_inc_beta_unchecked(xf, kf - xf + 1.0, alpha / 2.0)
    };
    let upper = if x == k {
        1.0
    } else {
        inv_reg_inc_beta_unchecked(xf + 1.0, kf - xf, 1.0 - alpha / 2.0)
    };
    Ok(BinomialInterval {
        lower,
        upper,
        method: Method::ClopperPearson,
        alpha,
        x,
        k,
    })
}

/// Equal-tailed credible interval under the `Beta(1/2, 1/2)` prior.
pub fn jeffreys_interval(x: u64, k: u64, alpha: f64) -> Result<BinomialInterval> {
    check(x, k, alpha)?;
    let a = x as f64 + 0.5;
    let b = (k - x) as f64 + 0.5;
    Ok(BinomialInterval {
        lower: inv_reg_inc_beta_unchecked(a, b, alpha / 2.0),
        upper: inv_reg_inc_beta_unchecked(a, b, 1.0 - alpha / 2.0),
        method: Method::Jeffreys,
        alpha,
        x,
        k,
    })
}

pub fn interval(method: Method, x: u64, k: u64, alpha: f64) -> Result<BinomialInterval> {
    match method {
        Method::Hoeffding => hoeffding_interval(x, k, alpha),
        Method::ClopperPearson => clopper_pearson(x, k, alpha),
        Method::Jeffreys => jeffreys_interval(x, k, alpha),
    }
}

/// The intervals for every outcome `x = 0..=k`, computed once.
#[derive(Clone, Debug)]
pub struct IntervalTable {
    method: Method,
    k: u64,
    alpha: f64,
    intervals: Vec<BinomialInterval>,
}

impl IntervalTable {
    pub fn new(method: Method, k: u64, alpha: f64) -> Result<Self> {
        let intervals = (0..=k).map(|x| interval(method, x, k, alpha)).collect::<Result<_>>()?;
        Ok(Self {
            method,
            k,
            alpha,
            intervals,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn get(&self, x: u64) -> &BinomialInterval {
        &self.intervals[x as usize]
    }

    /// `Σ_x P(X = x) · 1{p ∈ interval(x)}` for `X ~ Bin(k, p)`.
    pub fn exact_coverage(&self, p_true: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p_true) {
            return Err(domain("p_true", format!("must lie in [0, 1], got {p_true}")));
        }
        Ok(self
            .intervals
            .iter()
            .filter(|iv| iv.contains(p_true))
            .map(|iv| binomial_pmf(iv.x, self.k, p_true))
            .sum())
    }
}

/// Binomial probability mass in log space.
pub fn binomial_pmf(x: u64, k: u64, p: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if x == k { 1.0 } else { 0.0 };
    }
    let (xf, kf) = (x as f64, k as f64);
    (ln_binomial(k, x) + xf * p.ln() + (kf - xf) * (-p).ln_1p()).exp()
}

/// Exact coverage probability of `method` at `p_true`.
pub fn exact_coverage(method: Method, k: u64, alpha: f64, p_true: f64) -> Result<f64> {
    IntervalTable::new(method, k, alpha)?.exact_coverage(p_true)
}
