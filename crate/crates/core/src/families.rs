//! The worked integrand families and their analytic constants.
//!
//! * `hypersphere`: indicator of the unit ball inside `[-1,1]^p`, envelope
//!   volume `2^p`, mean `unit_ball_volume(p)`.
//! * `qnorm(q)`: `1 / (1 + ‖x‖_q)` on `[0,1]^p`, Lipschitz constant `p^η` with
//!   `η = max(1/q − 1/2, 0)`, Jensen lower bound `2 / (2 + p)`.
//! * `arctan_mvn(γ)`: `arctan(1 + ‖x‖₁)` under a centered normal law with
//!   `λ_min(Σ⁻¹) = γ`, Lipschitz constant `√p`, lower bound `arctan(1) = π/4`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use crate::bounds::BoundSpec;
use crate::error::{domain, Result};
use crate::specfun::unit_ball_volume;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExampleFamily {
    Hypersphere,
    QNorm { q: f64 },
    ArctanMvn { gamma: f64 },
}

impl fmt::Display for ExampleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleFamily::Hypersphere => f.write_str("hypersphere"),
            ExampleFamily::QNorm { .. } => f.write_str("qnorm"),
            ExampleFamily::ArctanMvn { .. } => f.write_str("arctan"),
        }
    }
}

impl ExampleFamily {
    pub fn qnorm(q: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(domain("q", format!("q-norm requires q >= 1, got {q}")));
        }
        Ok(ExampleFamily::QNorm { q })
    }

    pub fn arctan_mvn(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(domain("gamma", format!("must be finite and > 0, got {gamma}")));
        }
        Ok(ExampleFamily::ArctanMvn { gamma })
    }

    /// The family parameter (q or γ), if any.
    pub fn param(&self) -> Option<f64> {
        match *self {
            ExampleFamily::Hypersphere => None,
            ExampleFamily::QNorm { q } => Some(q),
            ExampleFamily::ArctanMvn { gamma } => Some(gamma),
        }
    }

    /// Bound specification in dimension `p`, including the mean lower bound.
    pub fn bound_spec(&self, p: u32) -> Result<BoundSpec> {
        if p == 0 {
            return Err(domain("p", "dimension must be at least 1"));
        }
        let pf = p as f64;
        match *self {
            ExampleFamily::Hypersphere => BoundSpec::bounded(2f64.powi(p as i32))?
                .with_mean_lower_bound(unit_ball_volume(p)?),
            ExampleFamily::QNorm { q } => {
                BoundSpec::convex_lipschitz_cube(pf.powf(qnorm_eta(q)))?.with_mean_lower_bound(2.0 / (2.0 + pf))
            }
            ExampleFamily::ArctanMvn { gamma } => {
                BoundSpec::lipschitz_log_concave(pf.sqrt(), gamma)?.with_mean_lower_bound(FRAC_PI_4)
            }
        }
    }
}

/// `η = max(1/q − 1/2, 0)`.
pub fn qnorm_eta(q: f64) -> f64 {
    (1.0 / q - 0.5).max(0.0)
}

/// `‖x‖_q` for `q ≥ 1`.
pub fn q_norm(x: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if q == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if q.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `1 / (1 + ‖x‖_q)`.
pub fn qnorm_integrand(x: &[f64], q: f64) -> f64 {
    1.0 / (1.0 + q_norm(x, q))
}

/// `arctan(1 + ‖x‖₁)`.
pub fn arctan_integrand(x: &[f64]) -> f64 {
    (1.0 + q_norm(x, 1.0)).atan()
}

pub fn in_unit_ball(x: &[f64]) -> bool {
    x.iter().map(|v| v * v).sum::<f64>() <= 1.0
}

/// `E[1/(1+|U|)]` for `U ~ U[0,1]`, the one-dimensional q-norm truth.
pub fn qnorm_truth_1d() -> f64 {
    std::f64::consts::LN_2
}

/// `E[arctan(1 + |Z|)]` for `Z ~ N(0, variance)`, by adaptive quadrature.
pub fn arctan_truth_1d(variance: f64) -> f64 {
    let s = variance.sqrt();
    let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    // the standard normal mass beyond 40 is far below double precision
    2.0 * crate::quad::adaptive_simpson(&|z| (1.0 + s * z).atan() * density(z), 0.0, 40.0, 1e-13)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_values() {
        assert_eq!(qnorm_eta(1.0), 0.5);
        assert_eq!(qnorm_eta(2.0), 0.0);
        assert_eq!(qnorm_eta(4.0), 0.0);
        assert!((qnorm_eta(1.5) - (1.0 / 1.5 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(q_norm(&x, 1.0), 7.0);
        assert_eq!(q_norm(&x, 2.0), 5.0);
        assert_eq!(q_norm(&x, f64::INFINITY), 4.0);
        assert!((q_norm(&x, 3.0) - 91f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn family_specs() {
        let s = ExampleFamily::qnorm(1.0).unwrap().bound_spec(4).unwrap();
        assert_eq!(s.lipschitz(), Some(2.0));
        assert!((s.mean_lower_bound().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let s = ExampleFamily::arctan_mvn(2.0).unwrap().bound_spec(9).unwrap();
        assert_eq!(s.lipschitz(), Some(3.0));
        assert_eq!(s.gamma(), Some(2.0));
        assert!(ExampleFamily::qnorm(0.5).is_err());
        assert!(ExampleFamily::arctan_mvn(0.0).is_err());
        assert!(ExampleFamily::Hypersphere.bound_spec(0).is_err());
    }
}
