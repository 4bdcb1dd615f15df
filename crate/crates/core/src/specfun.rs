//! Special functions: log-gamma, unit-ball volume and the regularized
//! incomplete beta function with its inverse.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Lanczos approximation with g = 607/128 and 15 terms (Godfrey's coefficients).
const LANCZOS_G: f64 = 607.0 / 128.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("x", format!("ln_gamma requires a finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// Log of the binomial coefficient `C(k, x)`.
pub fn ln_binomial(k: u64, x: u64) -> f64 {
    debug_assert!(x <= k);
    if x == 0 || x == k {
        return 0.0;
    }
    ln_gamma_unchecked(k as f64 + 1.0)
        - ln_gamma_unchecked(x as f64 + 1.0)
        - ln_gamma_unchecked((k - x) as f64 + 1.0)
}

/// Log-volume of the Euclidean unit ball in `p` dimensions.
pub fn ln_unit_ball_volume(p: u32) -> Result<f64> {
    if p == 0 {
        return Err(domain("p", "dimension must be at least 1"));
    }
    let half = p as f64 / 2.0;
    Ok(half * PI.ln() - ln_gamma_unchecked(half + 1.0))
}

/// Volume of the Euclidean unit ball, `π^{p/2} / Γ(p/2 + 1)`.
pub fn unit_ball_volume(p: u32) -> Result<f64> {
    ln_unit_ball_volume(p).map(f64::exp)
}

fn check_shape(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", format!("shape must be finite and > 0, got {a}")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("b", format!("shape must be finite and > 0, got {b}")));
    }
    Ok(())
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", format!("must lie in [0, 1], got {x}")));
    }
    Ok(reg_inc_beta_unchecked(a, b, x))
}

pub(crate) fn reg_inc_beta_unchecked(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Beta density, used for Newton steps in the quantile solver.
fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp()
}

/// Inverse of [`reg_inc_beta`] in `x`: the `u`-quantile of `Beta(a, b)`.
///
/// Safeguarded Newton iteration inside a shrinking bisection bracket.
/// The result is clamped to `[0, 1]`.
pub fn inv_reg_inc_beta(a: f64, b: f64, u: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("u", format!("probability must lie in [0, 1], got {u}")));
    }
    Ok(inv_reg_inc_beta_unchecked(a, b, u))
}

pub(crate) fn inv_reg_inc_beta_unchecked(a: f64, b: f64, u: f64) -> f64 {
    const MAX_ITER: usize = 200;
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    // start from the mean, which is always interior
    let mut x = a / (a + b);
    for _ in 0..MAX_ITER {
        let f = reg_inc_beta_unchecked(a, b, x) - u;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) {
            break;
        }
        let pdf = beta_pdf(a, b, x);
        let newton = if pdf > 0.0 && pdf.is_finite() {
            x - f / pdf
        } else {
            f64::NAN
        };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x {
            x = next;
            break;
        }
        x = next;
    }
    x.clamp(0.0, 1.0)
}
