//! Weighted sums of non-central chi-squared variables: deviation bounds,
//! comparison bounds from the literature, the Laplace transform and the
//! closed-form moments of the likelihood ratio under the null.
//!
//! Throughout, `Z = sum_i b_i X_i` with independent `X_i ~ chi2_{d_i}(a_i^2)`,
//! so `E[Z] = sum b_i (d_i + a_i^2)` and `Var[Z] = 2 sum b_i^2 (d_i + 2 a_i^2)`.
//! All bounds are exposed on the value scale of `Z`: each function returns the
//! threshold whose exceedance (or undershoot) probability is at most `exp(-x)`.

use crate::error::{HbrError, Result};
use crate::rng::{RngStream, Sampler};

/// One summand `b * chi2_d(a^2)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChiTerm {
    /// Weight `b >= 0`.
    pub weight: f64,
    /// Degrees of freedom `d >= 1`.
    pub dof: u32,
    /// Non-centrality `a^2 >= 0`.
    pub noncentrality: f64,
}

/// A weighted sum of independent non-central chi-squared variables.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DeviationSpec {
    terms: Vec<ChiTerm>,
}

impl DeviationSpec {
    pub fn new(terms: Vec<ChiTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(HbrError::InvalidParameter(
                "a deviation spec needs at least one term".into(),
            ));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.weight >= 0.0 && t.weight.is_finite()) {
                return Err(HbrError::InvalidParameter(format!(
                    "term {i}: weight {} must be finite and >= 0",
                    t.weight
                )));
            }
            if t.dof == 0 {
                return Err(HbrError::InvalidParameter(format!(
                    "term {i}: dof must be >= 1"
                )));
            }
            if !(t.noncentrality >= 0.0 && t.noncentrality.is_finite()) {
                return Err(HbrError::InvalidParameter(format!(
                    "term {i}: noncentrality {} must be finite and >= 0",
                    t.noncentrality
                )));
            }
        }
        Ok(Self { terms })
    }

    /// Convenience constructor from parallel slices.
    pub fn from_parts(weights: &[f64], dofs: &[u32], noncentralities: &[f64]) -> Result<Self> {
        if weights.len() != dofs.len() || weights.len() != noncentralities.len() {
            return Err(HbrError::InvalidParameter(
                "weights, dofs and noncentralities must have equal length".into(),
            ));
        }
        Self::new(
            weights
                .iter()
                .zip(dofs)
                .zip(noncentralities)
                .map(|((&weight, &dof), &noncentrality)| ChiTerm {
                    weight,
                    dof,
                    noncentrality,
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[ChiTerm] {
        &self.terms
    }

    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * (t.dof as f64 + t.noncentrality))
            .sum()
    }

    pub fn variance(&self) -> f64 {
        2.0 * self
            .terms
            .iter()
            .map(|t| t.weight * t.weight * (t.dof as f64 + 2.0 * t.noncentrality))
            .sum::<f64>()
    }

    /// `max_i b_i`, the weight sup-norm appearing in the linear term.
    pub fn max_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).fold(0.0, f64::max)
    }

    /// True when every noncentrality is zero (the central case, for which the
    /// Hsu et al. and Spokoiny-Zhilova bounds are stated).
    pub fn is_central(&self) -> bool {
        self.terms.iter().all(|t| t.noncentrality == 0.0)
    }

    /// One draw of `Z` from an already-positioned sampler. The noncentrality
    /// of each term is placed on its first Gaussian coordinate; by rotational
    /// invariance the distribution is unchanged.
    pub fn sample_with(&self, sampler: &mut Sampler) -> f64 {
        let mut z = 0.0;
        for t in self.terms() {
            let a = t.noncentrality.sqrt();
            let mut x = 0.0;
            for j in 0..t.dof {
                let g = sampler.standard_normal() + if j == 0 { a } else { 0.0 };
                x += g * g;
            }
            z += t.weight * x;
        }
        z
    }
}

fn require_positive_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(HbrError::Domain(format!(
            "deviation bounds require x > 0, got {x}"
        )));
    }
    Ok(())
}

/// Lower deviation threshold `E[Z] - sqrt(2 Var[Z] x)`:
/// `P(Z <= threshold) <= exp(-x)`.
pub fn tail_lower_threshold(spec: &DeviationSpec, x: f64) -> Result<f64> {
    require_positive_x(x)?;
    Ok(spec.mean() - (2.0 * spec.variance() * x).sqrt())
}

/// Upper deviation threshold `E[Z] + sqrt(2 Var[Z] x) + 2 max_i(b_i) x`:
/// `P(Z > threshold) <= exp(-x)`.
pub fn tail_upper_threshold(spec: &DeviationSpec, x: f64) -> Result<f64> {
    require_positive_x(x)?;
    Ok(spec.mean() + (2.0 * spec.variance() * x).sqrt() + 2.0 * spec.max_weight() * x)
}

/// Upper-tail thresholds from the literature, on the same `Z` scale, each with
/// exceedance probability at most `exp(-x)`.
///
/// The Hsu et al. and Spokoiny-Zhilova bounds are only stated for central
/// sums; the fields are `None` for non-central specs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ComparisonBounds {
    /// The bound used throughout this crate (strictly the sharpest).
    pub paper: f64,
    /// Rohde-Duembgen: extra `4 b_inf^2 x^2` under the square root.
    pub rohde_dumbgen: f64,
    /// Ben-Tal et al., translated to the `Z` scale.
    pub ben_tal: f64,
    /// Hsu et al., central case only.
    pub hsu: Option<f64>,
    /// Spokoiny-Zhilova, central case only.
    pub spokoiny_zhilova: Option<f64>,
}

pub fn comparison_bounds(spec: &DeviationSpec, x: f64) -> Result<ComparisonBounds> {
    require_positive_x(x)?;
    let mean = spec.mean();
    let var = spec.variance();
    let b_inf = spec.max_weight();

    let paper = mean + (2.0 * var * x).sqrt() + 2.0 * b_inf * x;
    let rohde_dumbgen = mean + (2.0 * var * x + 4.0 * b_inf * b_inf * x * x).sqrt() + 2.0 * b_inf * x;
    // sum b_i^2 (d_i + a_i^2) for the Ben-Tal form
    let s2: f64 = spec
        .terms()
        .iter()
        .map(|t| t.weight * t.weight * (t.dof as f64 + t.noncentrality))
        .sum();
    let ben_tal = mean + 2.0 * (2.0 * s2 * x + b_inf * b_inf * x * x).sqrt() + 2.0 * b_inf * x;

    let (hsu, spokoiny_zhilova) = if spec.is_central() {
        let tr_b4: f64 = spec
            .terms()
            .iter()
            .map(|t| t.weight * t.weight * t.dof as f64)
            .sum();
        let hsu = mean + 2.0 * (tr_b4 * x).sqrt() + 2.0 * b_inf * x;
        let sz = mean + (2.0 * (2.0 * tr_b4 * x).sqrt()).max(6.0 * b_inf * x);
        (Some(hsu), Some(sz))
    } else {
        (None, None)
    };

    Ok(ComparisonBounds {
        paper,
        rohde_dumbgen,
        ben_tal,
        hsu,
        spokoiny_zhilova,
    })
}

/// Laplace transform `E[exp(t (X + lambda)^2)] = exp(lambda^2 t / (1-2t)) / sqrt(1-2t)`
/// of a non-central chi-squared with one degree of freedom, defined for `t < 1/2`.
pub fn noncentral_chi2_laplace(t: f64, lambda: f64) -> Result<f64> {
    if !t.is_finite() || !lambda.is_finite() || t >= 0.5 {
        return Err(HbrError::Domain(format!(
            "the Laplace transform exists only for t < 1/2, got t = {t}"
        )));
    }
    let denom = 1.0 - 2.0 * t;
    Ok((lambda * lambda * t / denom).exp() / denom.sqrt())
}

/// Parameters of the likelihood-ratio moment `E[L^eta]` under the null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrMomentParams {
    /// Moment order.
    pub eta: f64,
    /// Points in the window (`n * bump_width`, may be fractional).
    pub n_window: f64,
    /// Mean-bump height.
    pub delta: f64,
    /// Relative variance bump.
    pub kappa_sq: f64,
    /// Baseline variance.
    pub sigma0_sq: f64,
}

impl LrMomentParams {
    fn validate(&self) -> Result<()> {
        if !(self.n_window > 0.0 && self.n_window.is_finite()) {
            return Err(HbrError::InvalidParameter(format!(
                "n_window = {} must be finite and > 0",
                self.n_window
            )));
        }
        if !self.sigma0_sq.is_finite() || self.sigma0_sq <= 0.0 {
            return Err(HbrError::InvalidParameter(format!(
                "sigma0_sq = {} must be > 0",
                self.sigma0_sq
            )));
        }
        if !(self.kappa_sq >= 0.0 && self.kappa_sq.is_finite()) {
            return Err(HbrError::InvalidParameter(format!(
                "kappa_sq = {} must be finite and >= 0",
                self.kappa_sq
            )));
        }
        if self.kappa_sq > 0.0 && self.eta >= 1.0 + 1.0 / self.kappa_sq {
            return Err(HbrError::Domain(format!(
                "E[L^eta] exists only for eta < 1 + 1/kappa_sq = {}, got eta = {}",
                1.0 + 1.0 / self.kappa_sq,
                self.eta
            )));
        }
        Ok(())
    }
}

/// Closed-form `E[L^eta]` of the single-window likelihood ratio under the null:
/// `(1+k2)^(-(eta-1) m/2) * (1+(1-eta) k2)^(-m/2) * exp(eta (eta-1) m d^2 / (2 s0^2 (1+(1-eta) k2)))`.
///
/// Evaluated in log space; equals exactly 1 at `eta` in {0, 1}.
pub fn lr_moment_h0(p: &LrMomentParams) -> Result<f64> {
    p.validate()?;
    let m = p.n_window;
    let k2 = p.kappa_sq;
    let shrink = (1.0 - p.eta) * k2; // 1 + (1-eta) k2 > 0 on the domain
    let log_val = -(p.eta - 1.0) * 0.5 * m * k2.ln_1p()
        - 0.5 * m * shrink.ln_1p()
        + p.eta * (p.eta - 1.0) * m * p.delta * p.delta / (2.0 * p.sigma0_sq * (1.0 + shrink));
    Ok(log_val.exp())
}

/// One draw of the weighted non-central chi-squared sum described by `spec`,
/// built from Gaussian draws of the given stream.
pub fn sample_weighted_noncentral_chi2(spec: &DeviationSpec, rng: RngStream) -> f64 {
    spec.sample_with(&mut rng.sampler())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(parts: &[(f64, u32, f64)]) -> DeviationSpec {
        DeviationSpec::new(
            parts
                .iter()
                .map(|&(weight, dof, noncentrality)| ChiTerm {
                    weight,
                    dof,
                    noncentrality,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn moment_formulas() {
        let s = spec(&[(1.0, 3, 0.0), (2.0, 1, 4.0)]);
        assert_eq!(s.mean(), 13.0); // 1*3 + 2*(1+4)
        assert_eq!(s.variance(), 78.0); // 2*(1*3 + 4*(1+8))
        assert_eq!(s.max_weight(), 2.0);
    }

    #[test]
    fn lower_threshold_chi2_2() {
        let s = spec(&[(1.0, 2, 0.0)]);
        let t = tail_lower_threshold(&s, 1.0).unwrap();
        assert!((t - (2.0 - 8.0f64.sqrt())).abs() < 1e-14, "{t}");
        // threshold is negative, so the exact chi2_2 undershoot probability is
        // 0 <= exp(-1)
        assert!(t < 0.0);
    }

    #[test]
    fn lower_threshold_mixed_spec() {
        let s = spec(&[(1.0, 3, 0.0), (2.0, 1, 4.0)]);
        let x = 0.7;
        let t = tail_lower_threshold(&s, x).unwrap();
        assert!((t - (13.0 - (156.0 * x).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn upper_threshold_chi2_2_and_exact_tail() {
        let s = spec(&[(1.0, 2, 0.0)]);
        let t = tail_upper_threshold(&s, 1.0).unwrap();
        // E + sqrt(2*Var*x) + 2*b_inf*x = 2 + sqrt(8) + 2
        assert!((t - (4.0 + 8.0f64.sqrt())).abs() < 1e-14, "{t}");
        // the central chi2_2 tail is exp(-t/2): the bound must hold
        assert!((-t / 2.0).exp() <= (-1.0f64).exp());
    }

    #[test]
    fn thresholds_tend_to_the_mean_as_x_vanishes() {
        let s = spec(&[(1.0, 3, 0.0), (2.0, 1, 4.0)]);
        let lo = tail_lower_threshold(&s, 1e-14).unwrap();
        let hi = tail_upper_threshold(&s, 1e-14).unwrap();
        assert!((lo - 13.0).abs() < 1e-5);
        assert!((hi - 13.0).abs() < 1e-5);
        let cb = comparison_bounds(&s, 1e-14).unwrap();
        assert!((cb.rohde_dumbgen - 13.0).abs() < 1e-5);
        assert!((cb.ben_tal - 13.0).abs() < 1e-5);
    }

    #[test]
    fn nonpositive_x_is_rejected() {
        let s = spec(&[(1.0, 1, 0.0)]);
        assert!(tail_lower_threshold(&s, 0.0).is_err());
        assert!(tail_upper_threshold(&s, -1.0).is_err());
        assert!(comparison_bounds(&s, f64::NAN).is_err());
    }

    #[test]
    fn paper_bound_is_sharper_than_rohde_dumbgen() {
        let specs = [
            spec(&[(1.0, 2, 0.0)]),
            spec(&[(1.0, 3, 0.0), (2.0, 1, 4.0)]),
            spec(&[(0.5, 10, 1.0), (3.0, 2, 0.0), (1.2, 5, 2.5)]),
        ];
        for s in &specs {
            for &x in &[0.1, 0.5, 1.0, 2.0, 4.0, 10.0] {
                let cb = comparison_bounds(s, x).unwrap();
                assert!(cb.paper <= cb.rohde_dumbgen, "{cb:?} at x={x}");
                // Rohde-Duembgen in turn undercuts Ben-Tal in this setting
                assert!(cb.rohde_dumbgen <= cb.ben_tal + 1e-12, "{cb:?} at x={x}");
            }
        }
    }

    #[test]
    fn central_only_bounds() {
        let central = spec(&[(1.0, 3, 0.0), (2.0, 5, 0.0)]);
        let cb = comparison_bounds(&central, 1.5).unwrap();
        // Hsu: E + 2 sqrt(sum b^2 d x) + 2 b_inf x
        let tr_b4 = 1.0 * 3.0 + 4.0 * 5.0;
        let want = central.mean() + 2.0 * (tr_b4 * 1.5f64).sqrt() + 2.0 * 2.0 * 1.5;
        assert!((cb.hsu.unwrap() - want).abs() < 1e-12);
        let want_sz = central.mean() + (2.0 * (2.0 * tr_b4 * 1.5f64).sqrt()).max(6.0 * 2.0 * 1.5);
        assert!((cb.spokoiny_zhilova.unwrap() - want_sz).abs() < 1e-12);

        let noncentral = spec(&[(1.0, 3, 1.0)]);
        let cb = comparison_bounds(&noncentral, 1.5).unwrap();
        assert!(cb.hsu.is_none());
        assert!(cb.spokoiny_zhilova.is_none());
    }

    #[test]
    fn laplace_transform_values() {
        assert!((noncentral_chi2_laplace(0.0, 3.7).unwrap() - 1.0).abs() < 1e-15);
        assert!(
            (noncentral_chi2_laplace(0.25, 0.0).unwrap() - 1.0 / 0.5f64.sqrt()).abs() < 1e-14
        );
        let want = 0.5f64.exp() / 0.8f64.sqrt(); // 1.8433262...
        assert!((noncentral_chi2_laplace(0.1, 2.0).unwrap() - want).abs() < 1e-14);
        assert!(noncentral_chi2_laplace(0.5, 1.0).is_err());
        assert!(noncentral_chi2_laplace(0.7, 0.0).is_err());
    }

    #[test]
    fn laplace_transform_matches_monte_carlo() {
        // variance of exp(t (X+l)^2) is finite only for t < 1/4
        let (t, lambda) = (0.2, 1.5);
        let want = noncentral_chi2_laplace(t, lambda).unwrap();
        let n = 200_000;
        let mut sampler = RngStream::new(901, 0).sampler();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = sampler.standard_normal() + lambda;
            let v = (t * g * g).exp();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn lr_moment_is_one_at_eta_zero_and_one() {
        let base = LrMomentParams {
            eta: 1.0,
            n_window: 20.0,
            delta: 0.3,
            kappa_sq: 0.25,
            sigma0_sq: 1.0,
        };
        assert_eq!(lr_moment_h0(&base).unwrap(), 1.0);
        assert_eq!(lr_moment_h0(&LrMomentParams { eta: 0.0, ..base }).unwrap(), 1.0);
    }

    #[test]
    fn lr_moment_existence_condition() {
        let p = LrMomentParams {
            eta: 5.0, // 1 + 1/0.25 = 5
            n_window: 20.0,
            delta: 0.3,
            kappa_sq: 0.25,
            sigma0_sq: 1.0,
        };
        assert!(lr_moment_h0(&p).is_err());
        assert!(lr_moment_h0(&LrMomentParams { eta: 4.999, ..p }).is_ok());
    }

    #[test]
    fn lr_moment_is_continuous_in_eta() {
        let at = |eta| {
            lr_moment_h0(&LrMomentParams {
                eta,
                n_window: 20.0,
                delta: 0.3,
                kappa_sq: 0.25,
                sigma0_sq: 1.0,
            })
            .unwrap()
        };
        let mut eta = -1.0;
        while eta < 3.0 {
            let v = at(eta);
            let jump = ((at(eta + 1e-7) - v) / v).abs();
            assert!(jump < 1e-4, "relative jump {jump} at eta {eta}");
            eta += 0.05;
        }
    }

    #[test]
    fn lr_moment_matches_monte_carlo() {
        // draw L^eta directly from its definition over one window of m points
        let p = LrMomentParams {
            eta: 1.2,
            n_window: 20.0,
            delta: 0.3,
            kappa_sq: 0.25,
            sigma0_sq: 1.0,
        };
        let want = lr_moment_h0(&p).unwrap();
        let m = 20usize;
        let reps = 200_000;
        let mut sampler = RngStream::new(902, 0).sampler();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..reps {
            let mut expo = 0.0;
            for _ in 0..m {
                let y = sampler.standard_normal();
                expo += p.kappa_sq * y * y + 2.0 * y * p.delta - p.delta * p.delta;
            }
            let log_l = -(m as f64) / 2.0 * p.kappa_sq.ln_1p()
                + expo / (2.0 * (1.0 + p.kappa_sq) * p.sigma0_sq);
            let v = (p.eta * log_l).exp();
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / reps as f64;
        let se = ((sumsq / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn sampler_definition_single_gaussian() {
        let s = spec(&[(1.0, 1, 0.0)]);
        let stream = RngStream::new(55, 3);
        let draw = sample_weighted_noncentral_chi2(&s, stream);
        let z = stream.sampler().standard_normal();
        assert_eq!(draw, z * z);
    }

    #[test]
    fn sampler_empirical_moments() {
        let s = spec(&[(1.0, 3, 0.0), (2.0, 1, 4.0)]);
        let n = 200_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..n {
            let v = sample_weighted_noncentral_chi2(&s, RngStream::new(777, r));
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let se_mean = (s.variance() / n as f64).sqrt();
        assert!((mean - s.mean()).abs() < 4.0 * se_mean, "mean {mean}");
        // SE of the sample variance of a chi-squared-like variable: use a
        // generous multiple of var * sqrt(2/n)
        let se_var = s.variance() * (2.0 / n as f64).sqrt() * 2.0;
        assert!((var - s.variance()).abs() < 5.0 * se_var, "var {var}");
    }

    #[test]
    fn mc_tail_frequencies_respect_both_bounds() {
        let s = spec(&[(0.5, 4, 1.0), (1.5, 2, 0.0)]);
        let x = 2.0;
        let lo = tail_lower_threshold(&s, x).unwrap();
        let hi = tail_upper_threshold(&s, x).unwrap();
        let n = 100_000u64;
        let mut below = 0u64;
        let mut above = 0u64;
        for r in 0..n {
            let v = sample_weighted_noncentral_chi2(&s, RngStream::new(778, r));
            if v <= lo {
                below += 1;
            }
            if v > hi {
                above += 1;
            }
        }
        let bound = (-x).exp();
        let se = (bound * (1.0 - bound) / n as f64).sqrt();
        assert!((below as f64 / n as f64) <= bound + 3.0 * se);
        assert!((above as f64 / n as f64) <= bound + 3.0 * se);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(DeviationSpec::new(vec![]).is_err());
        assert!(DeviationSpec::from_parts(&[1.0], &[0], &[0.0]).is_err());
        assert!(DeviationSpec::from_parts(&[-1.0], &[1], &[0.0]).is_err());
        assert!(DeviationSpec::from_parts(&[1.0], &[1], &[-0.5]).is_err());
        assert!(DeviationSpec::from_parts(&[1.0, 2.0], &[1], &[0.0]).is_err());
    }
}
