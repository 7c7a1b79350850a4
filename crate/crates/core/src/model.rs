//! Model parameterization, candidate-window grid and synthetic data.
//!
//! Sample `i` of `n` sits at position `i/n`; candidate bump locations are the
//! `l = 1/bump_width` grid intervals `((j-1)/l, j/l]`. Window membership is
//! decided by exact integer arithmetic (`i*l > n*(j-1)` and `i*l <= n*j`), so
//! for fractional `n*bump_width` the window sizes differ by at most one and
//! every index belongs to exactly one window.

use std::io::{BufRead, Write};

use crate::error::{HbrError, Result};
use crate::rng::RngStream;

/// Tolerance on `round(1/bump_width) * bump_width - 1` used to accept a grid.
const GRID_TOL: f64 = 1e-9;

/// Full HBR model parameterization.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HbrParams {
    /// Sample count `n`.
    pub n: usize,
    /// Relative bump width `|I|` with `1/|I|` integral.
    pub bump_width: f64,
    /// Bump height in the mean.
    pub delta: f64,
    /// Baseline variance, strictly positive.
    pub sigma0_sq: f64,
    /// Additional in-bump variance, nonnegative.
    pub sigman_sq: f64,
    /// Significance level of the tests.
    pub alpha: f64,
}

impl HbrParams {
    pub fn new(
        n: usize,
        bump_width: f64,
        delta: f64,
        sigma0_sq: f64,
        sigman_sq: f64,
        alpha: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(HbrError::InvalidParameter(format!("n = {n} must be >= 2")));
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
        if !(sigman_sq >= 0.0 && sigman_sq.is_finite()) {
            return Err(HbrError::InvalidParameter(format!(
                "sigman_sq = {sigman_sq} must be finite and >= 0"
            )));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(HbrError::InvalidParameter(format!(
                "delta = {delta} must be finite and >= 0"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(HbrError::InvalidParameter(format!(
                "alpha = {alpha} must lie in (0,1)"
            )));
        }
        let l = window_count(bump_width)?;
        if n < l {
            return Err(HbrError::SampleCountTooSmall { n, windows: l });
        }
        Ok(Self {
            n,
            bump_width,
            delta,
            sigma0_sq,
            sigman_sq,
            alpha,
        })
    }

    /// Relative variance bump `kappa^2 = sigman^2 / sigma0^2`.
    pub fn kappa_sq(&self) -> f64 {
        self.sigman_sq / self.sigma0_sq
    }

    /// Number of candidate windows `l = 1/bump_width`.
    pub fn window_count(&self) -> usize {
        window_count(self.bump_width).expect("validated at construction")
    }

    pub fn grid(&self) -> WindowGrid {
        candidate_windows(self.n, self.bump_width).expect("validated at construction")
    }
}

fn window_count(bump_width: f64) -> Result<usize> {
    let recip = 1.0 / bump_width;
    let l = recip.round();
    if l < 1.0 || (l * bump_width - 1.0).abs() >= GRID_TOL {
        return Err(HbrError::NonAdmissibleGrid {
            bump_width,
            reciprocal: recip,
        });
    }
    Ok(l as usize)
}

/// One candidate window: 1-based index and inclusive 1-based sample range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Window {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl Window {
    /// Number of sample points in the window.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one point
    }

    /// 0-based slice range into a values vector.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

/// The partition of `{1..n}` into `l` candidate windows.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    pub n: usize,
    pub bump_width: f64,
    windows: Vec<Window>,
}

impl WindowGrid {
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Window by 1-based index.
    pub fn window(&self, index: usize) -> Result<&Window> {
        if index == 0 || index > self.windows.len() {
            return Err(HbrError::WindowOutOfRange {
                index,
                windows: self.windows.len(),
            });
        }
        Ok(&self.windows[index - 1])
    }

    /// Largest window size; thresholds use this so the level guarantee holds
    /// for every window.
    pub fn max_window_size(&self) -> usize {
        self.windows.iter().map(Window::len).max().unwrap_or(0)
    }
}

/// Build the candidate-window grid: window `j` holds the indices `i` with
/// `(j-1) * bump_width < i/n <= j * bump_width`.
pub fn candidate_windows(n: usize, bump_width: f64) -> Result<WindowGrid> {
    let l = window_count(bump_width)?;
    if n < l {
        return Err(HbrError::SampleCountTooSmall { n, windows: l });
    }
    let windows = (1..=l)
        .map(|j| {
            // i > n(j-1)/l  and  i <= nj/l, all in exact integer arithmetic
            let start = n * (j - 1) / l + 1;
            let end = n * j / l;
            Window {
                index: j,
                start,
                end,
            }
        })
        .collect();
    Ok(WindowGrid {
        n,
        bump_width,
        windows,
    })
}

/// A data vector together with the parameters that generated (or describe) it.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub values: Vec<f64>,
    pub params: HbrParams,
    /// Bump window for synthetic alternative data; absent under the null.
    pub true_window: Option<usize>,
}

/// Draw `Y_i` i.i.d. `N(0, sigma0^2)`.
pub fn generate_h0(params: &HbrParams, rng: RngStream) -> Observations {
    generate_h0_with(params, &mut rng.sampler())
}

/// As [`generate_h0`], drawing from an already-positioned sampler.
pub fn generate_h0_with(params: &HbrParams, sampler: &mut crate::rng::Sampler) -> Observations {
    let s0 = params.sigma0_sq.sqrt();
    let values = (0..params.n).map(|_| s0 * sampler.standard_normal()).collect();
    Observations {
        values,
        params: *params,
        true_window: None,
    }
}

/// Draw from the alternative with the bump in `window_index`:
/// `Y_i = delta*1{i in window} + sqrt(sigma0^2 + sigman^2*1{i in window}) * Z_i`.
pub fn generate_h1(params: &HbrParams, window_index: usize, rng: RngStream) -> Result<Observations> {
    generate_h1_with(params, window_index, &mut rng.sampler())
}

/// As [`generate_h1`], drawing from an already-positioned sampler.
pub fn generate_h1_with(
    params: &HbrParams,
    window_index: usize,
    sampler: &mut crate::rng::Sampler,
) -> Result<Observations> {
    let grid = params.grid();
    let window = *grid.window(window_index)?;
    let s_out = params.sigma0_sq.sqrt();
    let s_in = (params.sigma0_sq + params.sigman_sq).sqrt();
    let values = (1..=params.n)
        .map(|i| {
            let z = sampler.standard_normal();
            if i >= window.start && i <= window.end {
                params.delta + s_in * z
            } else {
                s_out * z
            }
        })
        .collect();
    Ok(Observations {
        values,
        params: *params,
        true_window: Some(window_index),
    })
}

impl Observations {
    /// Write the `index,value` CSV (LF endings, 17 significant digits).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{:.16e}", i + 1, v)?;
        }
        Ok(())
    }
}

/// Read back the values column of an `index,value` CSV.
pub fn read_values_csv<R: BufRead>(r: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim_end() == "index,value" => {}
        Some((_, Ok(other))) => {
            return Err(HbrError::CsvParse {
                line: 1,
                message: format!("expected header 'index,value', got '{other}'"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(HbrError::CsvParse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let (index_s, value_s) = line.split_once(',').ok_or_else(|| HbrError::CsvParse {
            line: lineno,
            message: "expected two comma-separated fields".into(),
        })?;
        let index: usize = index_s.trim().parse().map_err(|e| HbrError::CsvParse {
            line: lineno,
            message: format!("bad index '{index_s}': {e}"),
        })?;
        if index != values.len() + 1 {
            return Err(HbrError::CsvParse {
                line: lineno,
                message: format!("index {index} out of order, expected {}", values.len() + 1),
            });
        }
        let value: f64 = value_s.trim().parse().map_err(|e| HbrError::CsvParse {
            line: lineno,
            message: format!("bad value '{value_s}': {e}"),
        })?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(HbrError::CsvParse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(values)
}
