//! Deterministic, parallel Monte Carlo estimation of test level and power.
//!
//! Replication `r` of a standalone estimate uses substream `r`; inside a
//! power grid, cell `i` uses substreams `i*R .. (i+1)*R`, so a 1x1 grid
//! reproduces the standalone estimate bit-exactly and results never depend
//! on thread count or execution order. All `R` replications always run (no
//! sequential stopping), keeping the estimates unbiased.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{HbrError, Result};
use crate::model::{generate_h0_with, generate_h1_with, HbrParams};
use crate::rng::RngStream;
use crate::scan::{self, log_likelihood_ratio};

/// Which test the harness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Known,
    Adaptive,
    Homogeneous,
}

/// Bump placement under the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowChoice {
    /// The bump sits in one fixed window for every replication.
    Fixed(usize),
    /// A fresh uniformly drawn window per replication (the default; by
    /// exchangeability of the grid the power is window-invariant).
    UniformRandom,
}

/// Null or alternative data generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Null,
    Alt(WindowChoice),
}

/// One Monte Carlo experiment description.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McConfig {
    pub replications: u64,
    pub seed: u64,
    pub which_test: TestKind,
    pub params: HbrParams,
    pub hypothesis: Hypothesis,
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(HbrError::InvalidParameter(
                "replications must be >= 1".into(),
            ));
        }
        let l = self.params.window_count();
        if let Hypothesis::Alt(WindowChoice::Fixed(j)) = self.hypothesis {
            if j == 0 || j > l {
                return Err(HbrError::WindowOutOfRange {
                    index: j,
                    windows: l,
                });
            }
        }
        match self.which_test {
            TestKind::Known | TestKind::Adaptive => {
                if self.params.kappa_sq() <= 0.0 {
                    return Err(HbrError::InvalidParameter(
                        "the known and adaptive tests need kappa_sq > 0".into(),
                    ));
                }
            }
            TestKind::Homogeneous => {}
        }
        if self.which_test == TestKind::Adaptive {
            for w in self.params.grid().windows() {
                if w.len() < 2 {
                    return Err(HbrError::DegenerateWindow {
                        index: w.index,
                        size: w.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Run one replication on the given substream; true means reject.
    fn run_one(&self, substream: u64) -> bool {
        let mut sampler = RngStream::new(self.seed, substream).sampler();
        let obs = match self.hypothesis {
            Hypothesis::Null => generate_h0_with(&self.params, &mut sampler),
            Hypothesis::Alt(choice) => {
                let window = match choice {
                    WindowChoice::Fixed(j) => j,
                    WindowChoice::UniformRandom => {
                        sampler.below(self.params.window_count() as u64) as usize + 1
                    }
                };
                generate_h1_with(&self.params, window, &mut sampler)
                    .expect("window validated before the replication loop")
            }
        };
        let outcome = match self.which_test {
            TestKind::Known => scan::test_known(&obs),
            TestKind::Adaptive => scan::test_adaptive(&obs),
            TestKind::Homogeneous => scan::test_homogeneous(&obs),
        };
        outcome.expect("parameters validated before the replication loop").reject
    }
}

fn rejection_count(cfg: &McConfig, substream_base: u64) -> u64 {
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| u64::from(cfg.run_one(substream_base + r)))
        .sum()
}

/// Fraction of replications that reject, with the binomial standard error
/// `sqrt(p (1-p) / R)`.
pub fn estimate_rejection_rate(cfg: &McConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let k = rejection_count(cfg, 0);
    let r = cfg.replications as f64;
    let p = k as f64 / r;
    Ok((p, (p * (1.0 - p) / r).sqrt()))
}

/// Monte Carlo power/level estimates over a `(delta, kappa_sq)` lattice.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PowerGrid {
    pub delta_axis: Vec<f64>,
    pub kappa_sq_axis: Vec<f64>,
    /// Row-major over `delta_axis` then `kappa_sq_axis`: the cell for
    /// `(delta_axis[i], kappa_sq_axis[j])` sits at `i * kappa_sq_axis.len() + j`.
    pub estimates: Vec<PowerCell>,
    pub config: McConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerCell {
    pub delta: f64,
    pub kappa_sq: f64,
    pub power: f64,
    pub std_err: f64,
}

impl PowerGrid {
    pub fn cell(&self, delta_idx: usize, kappa_idx: usize) -> &PowerCell {
        &self.estimates[delta_idx * self.kappa_sq_axis.len() + kappa_idx]
    }

    /// Write the `delta,kappa_sq,power,std_err` CSV (LF endings).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,kappa_sq,power,std_err")?;
        for cell in &self.estimates {
            writeln!(
                w,
                "{:.6},{:.6},{:.6},{:.6}",
                cell.delta, cell.kappa_sq, cell.power, cell.std_err
            )?;
        }
        Ok(())
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(HbrError::InvalidParameter(format!("{name} axis is empty")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0] || w[1].is_nan()) {
        return Err(HbrError::InvalidParameter(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Estimate power over the lattice. Cell `(i, j)` (delta-major) uses
/// substreams `(i * len(kappa) + j) * R + r`, making the grid reproducible
/// independently of shape, thread count and execution order.
pub fn power_surface(
    template: &McConfig,
    delta_axis: &[f64],
    kappa_sq_axis: &[f64],
) -> Result<PowerGrid> {
    check_axis("delta", delta_axis)?;
    check_axis("kappa_sq", kappa_sq_axis)?;
    let mut cells = Vec::with_capacity(delta_axis.len() * kappa_sq_axis.len());
    for (di, &delta) in delta_axis.iter().enumerate() {
        for (ki, &kappa_sq) in kappa_sq_axis.iter().enumerate() {
            let params = HbrParams::new(
                template.params.n,
                template.params.bump_width,
                delta,
                template.params.sigma0_sq,
                kappa_sq * template.params.sigma0_sq,
                template.params.alpha,
            )?;
            let cfg = McConfig {
                params,
                ..*template
            };
            cfg.validate()?;
            let cell_index = (di * kappa_sq_axis.len() + ki) as u64;
            cells.push((cell_index, cfg, delta, kappa_sq));
        }
    }
    let estimates: Vec<PowerCell> = cells
        .par_iter()
        .map(|(cell_index, cfg, delta, kappa_sq)| {
            let k = rejection_count(cfg, cell_index * cfg.replications);
            let r = cfg.replications as f64;
            let p = k as f64 / r;
            PowerCell {
                delta: *delta,
                kappa_sq: *kappa_sq,
                power: p,
                std_err: (p * (1.0 - p) / r).sqrt(),
            }
        })
        .collect();
    Ok(PowerGrid {
        delta_axis: delta_axis.to_vec(),
        kappa_sq_axis: kappa_sq_axis.to_vec(),
        estimates,
        config: *template,
    })
}

/// Monte Carlo estimate under the null of `E | l^{-1} sum_w L(w) - 1 |`,
/// the mixture-discrepancy bound on achievable power beyond the level.
/// The window average of likelihood ratios is formed in log space.
pub fn mixture_discrepancy(
    params: &HbrParams,
    replications: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if replications == 0 {
        return Err(HbrError::InvalidParameter(
            "replications must be >= 1".into(),
        ));
    }
    let grid = params.grid();
    let kappa_sq = params.kappa_sq();
    let (sum, sumsq) = (0..replications)
        .into_par_iter()
        .map(|r| {
            let obs = crate::model::generate_h0(params, RngStream::new(seed, r));
            let log_ls: Vec<f64> = grid
                .windows()
                .iter()
                .map(|w| {
                    log_likelihood_ratio(&obs.values, w, params.delta, kappa_sq, params.sigma0_sq)
                        .expect("parameters validated by HbrParams")
                })
                .collect();
            let max = log_ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let log_mean = max
                + (log_ls.iter().map(|v| (v - max).exp()).sum::<f64>() / grid.len() as f64).ln();
            let dev = log_mean.exp_m1().abs();
            (dev, dev * dev)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let r = replications as f64;
    let mean = sum / r;
    let var = (sumsq / r - mean * mean).max(0.0);
    Ok((mean, (var / r).sqrt()))
}

/// The three simulation presets: `(n, bump_width)` triples chosen so that
/// `n |I| / log(1/|I|)` is constant across them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `|I| = 0.1, n = 829`
    Small,
    /// `|I| = 0.05, n = 2157`
    Medium,
    /// `|I| = 0.025, n = 5312`
    Large,
}

impl Preset {
    pub fn n(self) -> usize {
        match self {
            Preset::Small => 829,
            Preset::Medium => 2157,
            Preset::Large => 5312,
        }
    }

    pub fn bump_width(self) -> f64 {
        match self {
            Preset::Small => 0.1,
            Preset::Medium => 0.05,
            Preset::Large => 0.025,
        }
    }

    pub fn params(self, delta: f64, kappa_sq: f64, sigma0_sq: f64, alpha: f64) -> Result<HbrParams> {
        HbrParams::new(
            self.n(),
            self.bump_width(),
            delta,
            sigma0_sq,
            kappa_sq * sigma0_sq,
            alpha,
        )
    }

    pub const ALL: [Preset; 3] = [Preset::Small, Preset::Medium, Preset::Large];
}

/// The power-study delta axis 0.01, 0.02, ..., 0.70.
pub fn paper_delta_axis() -> Vec<f64> {
    (1..=70).map(|i| i as f64 / 100.0).collect()
}

/// The power-study kappa^2 axis 0.01, 0.02, ..., 1.20.
pub fn paper_kappa_sq_axis() -> Vec<f64> {
    (1..=120).map(|i| i as f64 / 100.0).collect()
}
