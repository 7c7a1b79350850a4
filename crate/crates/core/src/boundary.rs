//! Detection-boundary constants, regime classification, the price of
//! adaptation and the numerical lower-bound condition evaluator.
//!
//! The regimes are classified by `c = lim sigman^2/(delta * sigma0)`:
//! dominant mean (c = 0), equilibrium (0 < c < inf) and dominant variance
//! (c = inf). Boundary constants are stated on two rate scales —
//! `sqrt(n|I|) * delta` (mean rate) and `sqrt(n|I|) * kappa^2` (variance
//! rate) — and the relaxed constants (kappa not vanishing) on the bare
//! `sqrt(n|I|)` unit rate.

use crate::error::{HbrError, Result};

/// Regime kind by the limit of `sigman^2 / (delta * sigma0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RegimeKind {
    /// Dominant mean regime, `c = 0`.
    Dmr,
    /// Equilibrium regime, `0 < c < inf`.
    Er,
    /// Dominant variance regime, `c = inf`.
    Dvr,
}

/// A classified regime. `c` is an extended real (`f64::INFINITY` for DVR);
/// `kappa_limit` is the limit of `kappa` itself, zero in the
/// vanishing-variance subregimes and positive in the relaxed ones.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// JSON has no infinity, so `c = inf` serializes as the string `"inf"`.
    #[serde(serialize_with = "serialize_extended_real")]
    pub c: f64,
    pub kappa_limit: f64,
}

fn serialize_extended_real<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// Rate scale a boundary constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateScale {
    /// `sqrt(n|I|) * delta ~ C * sqrt(-log |I|)`.
    MeanRate,
    /// `sqrt(n|I|) * kappa^2 ~ C * sqrt(-log |I|)`.
    VarianceRate,
    /// `sqrt(n|I|) ~ C * sqrt(-log |I|)` (relaxed constants).
    UnitRate,
}

/// Which side of the detection boundary a constant certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// One detection-boundary constant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundaryResult {
    pub rate: RateScale,
    pub constant: f64,
    pub side: Side,
    pub adaptive: bool,
}

/// Classify an extended real `c` into its regime.
pub fn classify_regime(c: f64) -> Result<Regime> {
    if c.is_nan() || c < 0.0 {
        return Err(HbrError::Domain(format!(
            "regime parameter c must lie in [0, inf], got {c}"
        )));
    }
    let kind = if c == 0.0 {
        RegimeKind::Dmr
    } else if c.is_infinite() {
        RegimeKind::Dvr
    } else {
        RegimeKind::Er
    };
    Ok(Regime {
        kind,
        c,
        kappa_limit: 0.0,
    })
}

/// The detection-boundary constant of Table-1 type for a regime, rate scale,
/// side, and adaptivity.
///
/// Non-adaptive constants are identical on both sides (the boundary is
/// sharp). Adaptive lower bounds exist only in the DMR; elsewhere the query
/// is an [`HbrError::Unsupported`] error rather than a guess. The mean rate
/// applies in DMR and ER, the variance rate in ER and DVR.
pub fn boundary_constant(
    regime: &Regime,
    sigma0: f64,
    rate: RateScale,
    side: Side,
    adaptive: bool,
) -> Result<BoundaryResult> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "sigma0 = {sigma0} must be finite and > 0"
        )));
    }
    let c = regime.c;
    let constant = match (regime.kind, rate) {
        (RegimeKind::Dmr, RateScale::MeanRate) => {
            // adaptation is free in the DMR; both sides share sqrt(2) sigma0
            2.0f64.sqrt() * sigma0
        }
        (RegimeKind::Er, RateScale::MeanRate) => {
            if adaptive {
                require_upper(side, "ER")?;
                sigma0 * (c + (2.0 + 3.0 * c * c).sqrt()) / (1.0 + c * c)
            } else {
                2.0f64.sqrt() * sigma0 * (2.0 / (2.0 + c * c)).sqrt()
            }
        }
        (RegimeKind::Er, RateScale::VarianceRate) => {
            if adaptive {
                require_upper(side, "ER")?;
                c * (c + (2.0 + 3.0 * c * c).sqrt()) / (1.0 + c * c)
            } else {
                2.0 * (c * c / (2.0 + c * c)).sqrt()
            }
        }
        (RegimeKind::Dvr, RateScale::VarianceRate) => {
            if adaptive {
                require_upper(side, "DVR")?;
                1.0 + 3.0f64.sqrt()
            } else {
                2.0
            }
        }
        (kind, rate) => {
            return Err(HbrError::Unsupported(format!(
                "no {rate:?} boundary constant is stated for {kind:?}"
            )))
        }
    };
    Ok(BoundaryResult {
        rate,
        constant,
        side,
        adaptive,
    })
}

fn require_upper(side: Side, regime: &str) -> Result<()> {
    if side == Side::Lower {
        return Err(HbrError::Unsupported(format!(
            "no adaptive lower bound is known in the {regime}"
        )));
    }
    Ok(())
}

/// All boundary constants applicable to a regime, in table order.
pub fn boundary_table(regime: &Regime, sigma0: f64) -> Result<Vec<BoundaryResult>> {
    let rates: &[RateScale] = match regime.kind {
        RegimeKind::Dmr => &[RateScale::MeanRate],
        RegimeKind::Er => &[RateScale::MeanRate, RateScale::VarianceRate],
        RegimeKind::Dvr => &[RateScale::VarianceRate],
    };
    let mut rows = Vec::new();
    for &rate in rates {
        rows.push(boundary_constant(regime, sigma0, rate, Side::Lower, false)?);
        rows.push(boundary_constant(regime, sigma0, rate, Side::Upper, false)?);
        rows.push(boundary_constant(regime, sigma0, rate, Side::Upper, true)?);
    }
    Ok(rows)
}

/// Relaxed-regime constant selector (kappa not vanishing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxedKind {
    ErLower,
    ErUpper,
    DvrLower,
    DvrUpper,
}

/// `(u - log(1+u)) / 2`, series-expanded for small `u` where the direct
/// difference would cancel.
fn half_u_minus_half_ln1p(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        // (u^2/2 - u^3/3 + u^4/4 - u^5/5) / 2
        u * u * (0.25 + u * (-1.0 / 6.0 + u * (0.125 - u / 10.0)))
    } else {
        0.5 * (u - u.ln_1p())
    }
}

/// Relaxed constants on the unit rate `sqrt(n|I|)`: the lower bounds with
/// logarithmic kappa terms and the (non-matching) upper bounds from the
/// likelihood-ratio test. `c` is ignored by the DVR variants.
pub fn relaxed_constant(which: RelaxedKind, c: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(HbrError::Domain(format!(
            "relaxed constants need kappa > 0, got {kappa}"
        )));
    }
    let k2 = kappa * kappa;
    let need_c = matches!(which, RelaxedKind::ErLower | RelaxedKind::ErUpper);
    if need_c && !(c > 0.0 && c.is_finite()) {
        return Err(HbrError::Domain(format!(
            "ER relaxed constants need finite c > 0, got {c}"
        )));
    }
    Ok(match which {
        RelaxedKind::ErLower => {
            // 1/sqrt(k2/(2c^2) (k2+c^2) - log(1+k2)/2), regrouped stably as
            // [k2/2 - log(1+k2)/2] + k4/(2c^2)
            let inner = half_u_minus_half_ln1p(k2) + k2 * k2 / (2.0 * c * c);
            1.0 / inner.sqrt()
        }
        RelaxedKind::DvrLower => 1.0 / half_u_minus_half_ln1p(k2).sqrt(),
        RelaxedKind::ErUpper => {
            let c2 = c * c;
            let num = (2.0 * k2 + 4.0 * k2 / c2 + 2.0 * k2 * k2 / c2 + 1.0 + 2.0 / c2).sqrt()
                + (1.0 + 2.0 / c2).sqrt();
            let den = k2 + 2.0 * k2 / c2 + k2 * k2 / c2;
            num / den
        }
        RelaxedKind::DvrUpper => ((2.0 * k2 + 1.0).sqrt() + 1.0) / k2,
    })
}

/// The price of adaptation `r(c)`: the ratio of the adaptive upper constant
/// to the sharp non-adaptive constant. `r(0) = 1`, `r(inf) = (1+sqrt(3))/2`,
/// maximum `sqrt(2)` at `c = sqrt(2)`.
pub fn price_of_adaptation(c: f64) -> Result<f64> {
    if c.is_nan() || c < 0.0 {
        return Err(HbrError::Domain(format!(
            "price of adaptation needs c in [0, inf], got {c}"
        )));
    }
    Ok(if c == 0.0 {
        1.0
    } else if c.is_infinite() {
        (1.0 + 3.0f64.sqrt()) / 2.0
    } else {
        (2.0 + c * c).sqrt() * (c + (2.0 + 3.0 * c * c).sqrt()) / (2.0 * (1.0 + c * c))
    })
}

/// Fractional sample-size saving over homogeneous detection at equilibrium
/// parameter `c`: `c^2/(2+c^2)`.
pub fn sample_size_reduction(c: f64) -> Result<f64> {
    if c.is_nan() || c < 0.0 {
        return Err(HbrError::Domain(format!(
            "sample size reduction needs c >= 0, got {c}"
        )));
    }
    if c.is_infinite() {
        return Ok(1.0);
    }
    Ok(c * c / (2.0 + c * c))
}

/// One point of a lower-bound condition schedule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConditionPoint {
    pub n: usize,
    pub bump_width: f64,
    pub delta: f64,
    pub kappa_sq: f64,
    pub sigma0_sq: f64,
    /// The auxiliary tilt `delta_n` of the condition, `0 <= tilt < 1/kappa_sq`.
    pub tilt: f64,
}

/// Value of the undetectability condition
/// `m d^2/(2 s0^2) (1+t)t/(1-t k2) - t (m/2) log(1+k2) - (m/2) log(1-t k2) + t log |I|`
/// with `m = n * bump_width`. A sequence diverging to `-inf` certifies an
/// undetectable class; this evaluator only reports values.
pub fn lower_bound_condition_value(
    n: usize,
    bump_width: f64,
    delta: f64,
    kappa_sq: f64,
    sigma0_sq: f64,
    tilt: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(HbrError::InvalidParameter("n must be >= 1".into()));
    }
    if !(bump_width > 0.0 && bump_width <= 1.0) {
        return Err(HbrError::InvalidParameter(format!(
            "bump_width = {bump_width} must lie in (0,1]"
        )));
    }
    if !(sigma0_sq > 0.0 && sigma0_sq.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "sigma0_sq = {sigma0_sq} must be finite and > 0"
        )));
    }
    if !(kappa_sq >= 0.0 && kappa_sq.is_finite()) {
        return Err(HbrError::InvalidParameter(format!(
            "kappa_sq = {kappa_sq} must be finite and >= 0"
        )));
    }
    if tilt.is_nan() || tilt < 0.0 || tilt * kappa_sq >= 1.0 {
        return Err(HbrError::Domain(format!(
            "tilt = {tilt} must satisfy 0 <= tilt and tilt * kappa_sq < 1"
        )));
    }
    let m = n as f64 * bump_width;
    let quad = m * delta * delta / (2.0 * sigma0_sq) * (1.0 + tilt) * tilt
        / (1.0 - tilt * kappa_sq);
    Ok(quad - tilt * 0.5 * m * kappa_sq.ln_1p() - 0.5 * m * (-tilt * kappa_sq).ln_1p()
        + tilt * bump_width.ln())
}

/// Evaluate the condition along a schedule.
pub fn condition_schedule(points: &[ConditionPoint]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            lower_bound_condition_value(
                p.n,
                p.bump_width,
                p.delta,
                p.kappa_sq,
                p.sigma0_sq,
                p.tilt,
            )
        })
        .collect()
}

/// Monotone-tail heuristic for "diverges to -inf": the last (up to) ten
/// values are strictly decreasing and all below -10. A diagnostic, not a
/// limit claim.
pub fn diverges_downward(values: &[f64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let tail = &values[values.len().saturating_sub(10)..];
    tail.windows(2).all(|w| w[1] < w[0]) && tail.iter().all(|&v| v < -10.0)
}
