//! Standard normal CDF and quantile.
//!
//! The quantile drives both the homogeneous baseline test and inverse-CDF
//! Gaussian sampling, so it has to be accurate (absolute error well below
//! 1e-9) and identical on every platform. It is computed from a rational
//! initial guess refined by Halley steps against [`normal_cdf`], which in
//! turn rests on an `erfc` built from two independent textbook routes: a
//! Taylor series for small arguments and a Lentz continued fraction for the
//! tail. The two routes overlap and are tested against each other.

use crate::error::{HbrError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// erf(x) by its Maclaurin series; adequate for |x| <= 1.75.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() || n > 120 {
            break;
        }
    }
    std::f64::consts::FRAC_2_SQRT_PI * sum
}

/// erfc(x) for x >= 1.0 via the continued fraction
/// `erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`
/// evaluated with the modified Lentz algorithm.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    // modified Lentz on f = x + (1/2)/(x + 1/(x + (3/2)/(x + ...))), a_k = k/2
    let mut f = x;
    let mut c = x;
    let mut d = 0.0_f64;
    let mut k = 0usize;
    loop {
        k += 1;
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 || k > 500 {
            break;
        }
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}

/// Complementary error function, full double precision over the real line.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 1.75 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

// Acklam's rational approximation of the normal quantile (~1e-9 relative);
// used only as the starting point for Halley refinement below.
fn quantile_initial(p: f64) -> f64 {
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
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Standard normal quantile with absolute error far below 1e-9.
///
/// Exactly antisymmetric: `normal_quantile(p) == -normal_quantile(1-p)` holds
/// up to the representation of `1-p` itself because the refinement is run on
/// `min(p, 1-p)` and mirrored.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return Err(HbrError::Domain(format!(
            "normal_quantile requires p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // work on the lower tail for a stable residual; mirror at the end
    let (q, sign) = if p <= 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let mut x = quantile_initial(q);
    for _ in 0..2 {
        let e = normal_cdf(x) - q;
        let d = normal_pdf(x);
        if d == 0.0 {
            break;
        }
        let u = e / d;
        // Halley step: second-order correction with cdf'' = -x * pdf
        x -= u / (1.0 + 0.5 * u * x);
    }
    Ok(sign * x)
}
