//! Binomial confidence intervals for a Monte-Carlo proportion.

use alloc::format;

use crate::{Error, Result};

/// Standard normal quantile function.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the error down to about machine precision.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    const P_LOW: f64 = 0.02425;

    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(libm::sqrt(-2.0 * libm::log(1.0 - p)))
    };

    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// `z_α`, the `1 - α/2` standard normal quantile.
pub fn z_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(normal_quantile(1.0 - alpha / 2.0))
}

fn check(s_hat: f64, k: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&s_hat) {
        return Err(Error::arg(format!("proportion {s_hat} is outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::arg("the replicate count must be at least 1"));
    }
    Ok(())
}

/// Wilson score interval for a proportion `s_hat` estimated from `k` draws.
pub fn wilson_interval(s_hat: f64, k: usize, alpha: f64) -> Result<(f64, f64)> {
    check(s_hat, k)?;
    let z = z_alpha(alpha)?;
    let k = k as f64;
    let z2 = z * z;
    let center = 2.0 * k * s_hat + z2;
    let spread = z * libm::sqrt(4.0 * k * s_hat * (1.0 - s_hat) + z2);
    let denom = 2.0 * (k + z2);
    let lo = ((center - spread) / denom).clamp(0.0, 1.0);
    let hi = ((center + spread) / denom).clamp(0.0, 1.0);
    Ok((lo, hi))
}

/// Normal-approximation interval `s_hat ± z sqrt(s_hat(1 - s_hat)/k)`,
/// clipped to `[0, 1]`.
pub fn normal_interval(s_hat: f64, k: usize, alpha: f64) -> Result<(f64, f64)> {
    check(s_hat, k)?;
    let z = z_alpha(alpha)?;
    let half = z * libm::sqrt(s_hat * (1.0 - s_hat) / k as f64);
    Ok(((s_hat - half).max(0.0), (s_hat + half).min(1.0)))
}
