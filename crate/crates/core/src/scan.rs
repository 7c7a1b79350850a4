//! Scan statistics, non-asymptotic thresholds and accept/reject decisions.
//!
//! Three tests share the same shape: evaluate a per-window statistic over the
//! candidate grid, take the maximum (ties broken to the smallest window
//! index), and compare it to a threshold calibrated by a union bound over the
//! `l = 1/bump_width` windows. With fractional `n * bump_width` the window
//! sizes differ by one; thresholds are computed at the largest window size,
//! which preserves the level guarantee for every window because all three
//! thresholds are increasing in the window size.

use crate::error::{HbrError, Result};
use crate::model::{Observations, Window, WindowGrid};
use crate::norm::normal_quantile;

pub use crate::norm::normal_quantile as quantile; // convenience re-export

/// Result of one test evaluation. `reject` holds exactly when
/// `statistic > threshold`, and `statistic` is the maximum of
/// `per_window_values` attained first at `argmax_window` (1-based).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub argmax_window: usize,
    pub per_window_values: Vec<f64>,
}

/// Per-window values plus their maximum, before a threshold is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanStatistic {
    pub statistic: f64,
    pub argmax_window: usize,
    pub per_window_values: Vec<f64>,
}

impl ScanStatistic {
    fn from_values(per_window_values: Vec<f64>) -> Self {
        let mut best = f64::NEG_INFINITY;
        let mut argmax = 1;
        for (i, &v) in per_window_values.iter().enumerate() {
            if v > best {
                best = v;
                argmax = i + 1;
            }
        }
        Self {
            statistic: best,
            argmax_window: argmax,
            per_window_values,
        }
    }

    /// Attach a threshold, producing the decision.
    pub fn with_threshold(self, threshold: f64) -> TestOutcome {
        TestOutcome {
            statistic: self.statistic,
            threshold,
            reject: self.statistic > threshold,
            argmax_window: self.argmax_window,
            per_window_values: self.per_window_values,
        }
    }
}

fn check_grid(values: &[f64], grid: &WindowGrid) -> Result<()> {
    if values.len() != grid.n {
        return Err(HbrError::InvalidParameter(format!(
            "observations have {} values but the grid expects n = {}",
            values.len(),
            grid.n
        )));
    }
    Ok(())
}

fn check_kappa(kappa_sq: f64) -> Result<()> {
    if !(kappa_sq > 0.0 && kappa_sq.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "kappa_sq = {kappa_sq} must be finite and > 0"
        )));
    }
    Ok(())
}

fn check_sigma0(sigma0_sq: f64) -> Result<()> {
    if !(sigma0_sq > 0.0 && sigma0_sq.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "sigma0_sq = {sigma0_sq} must be finite and > 0"
        )));
    }
    Ok(())
}

/// `-log(alpha * bump_width)`, the union-bound exponent shared by all
/// thresholds.
fn log_inv_alpha_bump(alpha: f64, bump_width: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(HbrError::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0,1)"
        )));
    }
    let ab = alpha * bump_width;
    if !(ab > 0.0 && ab < 1.0) {
        return Err(HbrError::InvalidParameter(format!(
            "alpha * bump_width = {ab} must lie in (0,1)"
        )));
    }
    Ok(-ab.ln())
}

/// Known-Delta per-window statistic `(1/sigma0^2) * sum (Y_i + delta/kappa^2)^2`.
pub fn statistic_known(
    values: &[f64],
    grid: &WindowGrid,
    delta: f64,
    kappa_sq: f64,
    sigma0_sq: f64,
) -> Result<ScanStatistic> {
    check_grid(values, grid)?;
    check_kappa(kappa_sq)?;
    check_sigma0(sigma0_sq)?;
    let shift = delta / kappa_sq;
    let per_window = grid
        .windows()
        .iter()
        .map(|w| {
            values[w.range()]
                .iter()
                .map(|y| {
                    let s = y + shift;
                    s * s
                })
                .sum::<f64>()
                / sigma0_sq
        })
        .collect();
    Ok(ScanStatistic::from_values(per_window))
}

/// Threshold of the known-Delta test:
/// `m + m g - 2 log(alpha |I|) + 2 sqrt(m (1 + 2g) log(1/(alpha |I|)))`
/// with `g = delta^2 / (sigma0^2 kappa^4)`.
pub fn threshold_known(
    alpha: f64,
    m: f64,
    bump_width: f64,
    delta: f64,
    kappa_sq: f64,
    sigma0_sq: f64,
) -> Result<f64> {
    check_kappa(kappa_sq)?;
    check_sigma0(sigma0_sq)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(HbrError::InvalidParameter(format!("m = {m} must be > 0")));
    }
    let x = log_inv_alpha_bump(alpha, bump_width)?;
    let g = delta * delta / (sigma0_sq * kappa_sq * kappa_sq);
    Ok(m + m * g + 2.0 * x + 2.0 * (m * (1.0 + 2.0 * g) * x).sqrt())
}

/// The known-Delta likelihood-ratio scan test at level `params.alpha`.
pub fn test_known(obs: &Observations) -> Result<TestOutcome> {
    let p = &obs.params;
    let grid = p.grid();
    let stat = statistic_known(&obs.values, &grid, p.delta, p.kappa_sq(), p.sigma0_sq)?;
    let threshold = threshold_known(
        p.alpha,
        grid.max_window_size() as f64,
        p.bump_width,
        p.delta,
        p.kappa_sq(),
        p.sigma0_sq,
    )?;
    Ok(stat.with_threshold(threshold))
}

/// Adaptive per-window statistic
/// `kappa^2/(sigma0^2 (kappa^2+1)) * sum (Y_i - Ybar)^2 + (sum Y_i)^2 / (sigma0^2 m_w)`.
pub fn statistic_adaptive(
    values: &[f64],
    grid: &WindowGrid,
    kappa_sq: f64,
    sigma0_sq: f64,
) -> Result<ScanStatistic> {
    check_grid(values, grid)?;
    check_kappa(kappa_sq)?;
    check_sigma0(sigma0_sq)?;
    for w in grid.windows() {
        if w.len() < 2 {
            return Err(HbrError::DegenerateWindow {
                index: w.index,
                size: w.len(),
            });
        }
    }
    let var_weight = kappa_sq / (sigma0_sq * (kappa_sq + 1.0));
    let per_window = grid
        .windows()
        .iter()
        .map(|w| {
            let seg = &values[w.range()];
            let m = seg.len() as f64;
            let sum: f64 = seg.iter().sum();
            let mean = sum / m;
            let centered: f64 = seg
                .iter()
                .map(|y| {
                    let c = y - mean;
                    c * c
                })
                .sum();
            var_weight * centered + sum * sum / (sigma0_sq * m)
        })
        .collect();
    Ok(ScanStatistic::from_values(per_window))
}

/// Threshold of the adaptive test:
/// `k2/(k2+1) (m-1) + 1 + 2 sqrt([k4/(k2+1)^2 (m-1) + 1] L) + 2 L`
/// with `L = log(1/(alpha |I|))`. The statistic is already standardized, so
/// no `sigma0` appears.
pub fn threshold_adaptive(alpha: f64, m: f64, bump_width: f64, kappa_sq: f64) -> Result<f64> {
    check_kappa(kappa_sq)?;
    if !(m >= 2.0 && m.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "m = {m} must be >= 2 for the adaptive threshold"
        )));
    }
    let x = log_inv_alpha_bump(alpha, bump_width)?;
    let r = kappa_sq / (kappa_sq + 1.0);
    Ok(r * (m - 1.0) + 1.0 + 2.0 * ((r * r * (m - 1.0) + 1.0) * x).sqrt() + 2.0 * x)
}

/// The adaptive (unknown-Delta) likelihood-ratio scan test.
pub fn test_adaptive(obs: &Observations) -> Result<TestOutcome> {
    let p = &obs.params;
    let grid = p.grid();
    let stat = statistic_adaptive(&obs.values, &grid, p.kappa_sq(), p.sigma0_sq)?;
    let threshold = threshold_adaptive(
        p.alpha,
        grid.max_window_size() as f64,
        p.bump_width,
        p.kappa_sq(),
    )?;
    Ok(stat.with_threshold(threshold))
}

/// Homogeneous baseline: per-window value `sum Y_i`, rejected when the
/// largest window sum exceeds `sigma0 * sqrt(m*) * z(1 - alpha * bump_width)`
/// (exact Gaussian quantile plus union bound).
pub fn test_homogeneous_with(
    values: &[f64],
    grid: &WindowGrid,
    sigma0_sq: f64,
    alpha: f64,
) -> Result<TestOutcome> {
    check_grid(values, grid)?;
    check_sigma0(sigma0_sq)?;
    if !(alpha > 0.0 && alpha < 1.0 && alpha * grid.bump_width < 1.0) {
        return Err(HbrError::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0,1)"
        )));
    }
    let per_window: Vec<f64> = grid
        .windows()
        .iter()
        .map(|w| values[w.range()].iter().sum::<f64>())
        .collect();
    let z = normal_quantile(1.0 - alpha * grid.bump_width)?;
    let threshold = sigma0_sq.sqrt() * (grid.max_window_size() as f64).sqrt() * z;
    Ok(ScanStatistic::from_values(per_window).with_threshold(threshold))
}

/// Homogeneous baseline test with parameters taken from the observations.
pub fn test_homogeneous(obs: &Observations) -> Result<TestOutcome> {
    let grid = obs.params.grid();
    test_homogeneous_with(&obs.values, &grid, obs.params.sigma0_sq, obs.params.alpha)
}

/// Log of the single-window likelihood ratio
/// `(k2+1)^(-m_w/2) * exp(sum (k2 Y^2 + 2 Y delta - delta^2) / (2 (1+k2) s0^2))`.
///
/// `kappa_sq = 0` is allowed and gives the homogeneous likelihood ratio (the
/// continuous limit of the formula).
pub fn log_likelihood_ratio(
    values: &[f64],
    window: &Window,
    delta: f64,
    kappa_sq: f64,
    sigma0_sq: f64,
) -> Result<f64> {
    if !(kappa_sq >= 0.0 && kappa_sq.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "kappa_sq = {kappa_sq} must be finite and >= 0"
        )));
    }
    check_sigma0(sigma0_sq)?;
    if window.end > values.len() {
        return Err(HbrError::WindowOutOfRange {
            index: window.index,
            windows: 0,
        });
    }
    let seg = &values[window.range()];
    let m = seg.len() as f64;
    let expo: f64 = seg
        .iter()
        .map(|y| kappa_sq * y * y + 2.0 * y * delta - delta * delta)
        .sum();
    Ok(-0.5 * m * kappa_sq.ln_1p() + expo / (2.0 * (1.0 + kappa_sq) * sigma0_sq))
}

/// The likelihood ratio itself; evaluated in log space and exponentiated last.
pub fn likelihood_ratio(
    values: &[f64],
    window: &Window,
    delta: f64,
    kappa_sq: f64,
    sigma0_sq: f64,
) -> Result<f64> {
    Ok(log_likelihood_ratio(values, window, delta, kappa_sq, sigma0_sq)?.exp())
}
