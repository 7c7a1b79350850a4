//! Subcommand implementations.
//!
//! Every argument struct doubles as the schema of the `--config` JSON file
//! (kebab-case keys); values given on the command line take precedence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use hbr_core::boundary::{
    boundary_constant, boundary_table, classify_regime, condition_schedule,
    diverges_downward, price_of_adaptation, relaxed_constant, ConditionPoint, RateScale,
    RegimeKind, RelaxedKind, Side,
};
use hbr_core::chi2::{comparison_bounds, tail_upper_threshold, DeviationSpec};
use hbr_core::mc::{
    paper_delta_axis, paper_kappa_sq_axis, power_surface, Hypothesis, McConfig, Preset, TestKind,
    WindowChoice,
};
use hbr_core::model::{generate_h0, generate_h1, read_values_csv, HbrParams, Observations};
use hbr_core::rng::RngStream;
use hbr_core::scan;

const EXIT_OK: ExitCode = ExitCode::SUCCESS;
const EXIT_REJECT: ExitCode = ExitCode::FAILURE;

// ---------------------------------------------------------------------------
// config-file plumbing
// ---------------------------------------------------------------------------

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("cannot parse config file {}", p.display()))
        }
    }
}

macro_rules! overlay_options {
    ($cli:ident, $cfg:ident: $($field:ident),+ $(,)?) => {
        $( if $cli.$field.is_none() { $cli.$field = $cfg.$field; } )+
    };
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing required flag --{flag} (or config key \"{flag}\")"))
}

// ---------------------------------------------------------------------------
// small shared helpers
// ---------------------------------------------------------------------------

/// Parse "a,b,c" or "start:step:end" (inclusive) into a float list.
fn parse_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if let Some((start, rest)) = text.split_once(':') {
        let (step, end) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("range syntax is start:step:end, got '{text}'"))?;
        let (start, step, end): (f64, f64, f64) = (start.parse()?, step.parse()?, end.parse()?);
        if step.is_nan() || step <= 0.0 || end < start {
            bail!("range '{text}' needs step > 0 and end >= start");
        }
        let count = ((end - start) / step + 1.5).floor() as usize;
        return Ok((0..count)
            .map(|i| start + i as f64 * step)
            .filter(|v| *v <= end + 1e-12)
            .collect());
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number '{part}'"))
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("bad integer '{part}'"))
        })
        .collect()
}

/// Repeat length-1 lists out to `len`; anything else must already have `len`.
fn broadcast<T: Clone>(name: &str, values: Vec<T>, len: usize) -> Result<Vec<T>> {
    if values.len() == len {
        Ok(values)
    } else if values.len() == 1 {
        Ok(vec![values[0].clone(); len])
    } else {
        bail!(
            "--{name} has {} entries, expected 1 or {len}",
            values.len()
        )
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SimulateArgs {
    /// Sample count n
    #[arg(long)]
    n: Option<usize>,
    /// Bump width |I| (1/|I| must be an integer)
    #[arg(long)]
    bump_width: Option<f64>,
    /// Mean-bump height (default 0)
    #[arg(long)]
    delta: Option<f64>,
    /// Baseline variance sigma0^2
    #[arg(long)]
    sigma0_sq: Option<f64>,
    /// Additional in-bump variance sigman^2 (default 0)
    #[arg(long)]
    sigman_sq: Option<f64>,
    /// Significance level recorded with the data (default 0.05)
    #[arg(long)]
    alpha: Option<f64>,
    /// RNG seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// RNG substream (default 0)
    #[arg(long)]
    substream: Option<u64>,
    /// Bump window index (1-based); mutually exclusive with --h0
    #[arg(long, conflicts_with = "h0")]
    window: Option<usize>,
    /// Generate null data (no bump)
    #[arg(long)]
    h0: bool,
    /// Output CSV path (stdout when absent); a .meta.json sidecar is written
    /// next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    params: &'a HbrParams,
    seed: u64,
    substream: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    true_window: Option<usize>,
}

pub fn simulate(mut args: SimulateArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: SimulateArgs = load_config(config)?;
    overlay_options!(args, cfg: n, bump_width, delta, sigma0_sq, sigman_sq, alpha, seed,
                     substream, window, out);
    args.h0 = args.h0 || cfg.h0;

    let params = HbrParams::new(
        require(args.n, "n")?,
        require(args.bump_width, "bump-width")?,
        args.delta.unwrap_or(0.0),
        require(args.sigma0_sq, "sigma0-sq")?,
        args.sigman_sq.unwrap_or(0.0),
        args.alpha.unwrap_or(0.05),
    )?;
    let stream = RngStream::new(args.seed.unwrap_or(0), args.substream.unwrap_or(0));
    let obs = match (args.h0, args.window) {
        (true, None) => generate_h0(&params, stream),
        (false, Some(j)) => generate_h1(&params, j, stream)?,
        (false, None) => bail!("one of --h0 or --window <j> is required"),
        (true, Some(_)) => unreachable!("clap conflicts_with"),
    };

    let mut csv = Vec::new();
    obs.write_csv(&mut csv)?;
    write_output(args.out.as_deref(), &csv)?;

    if let Some(out) = &args.out {
        let meta = SimulateMeta {
            params: &params,
            seed: stream.seed,
            substream: stream.substream,
            true_window: obs.true_window,
        };
        let json = serde_json::to_string_pretty(&meta)?;
        fs::write(sidecar_path(out, ".meta.json"), json + "\n")?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestChoice {
    Known,
    Adaptive,
    Homogeneous,
}

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct DetectArgs {
    /// Observations CSV (header `index,value`)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Which test to run
    #[arg(long, value_enum)]
    test: Option<TestChoice>,
    /// Significance level (default 0.05)
    #[arg(long)]
    alpha: Option<f64>,
    /// Bump width |I|
    #[arg(long)]
    bump_width: Option<f64>,
    /// Known bump height (required for --test known)
    #[arg(long)]
    delta: Option<f64>,
    /// Relative variance bump kappa^2 (required for known and adaptive)
    #[arg(long)]
    kappa_sq: Option<f64>,
    /// Baseline variance sigma0^2
    #[arg(long)]
    sigma0_sq: Option<f64>,
    /// Output JSON path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn detect(mut args: DetectArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: DetectArgs = load_config(config)?;
    overlay_options!(args, cfg: input, test, alpha, bump_width, delta, kappa_sq, sigma0_sq, out);

    let input = require(args.input, "input")?;
    let test = require(args.test, "test")?;
    let bump_width = require(args.bump_width, "bump-width")?;
    let sigma0_sq = require(args.sigma0_sq, "sigma0-sq")?;
    let alpha = args.alpha.unwrap_or(0.05);

    let file = fs::File::open(&input)
        .with_context(|| format!("cannot open {}", input.display()))?;
    let values = read_values_csv(std::io::BufReader::new(file))?;

    let (delta, kappa_sq) = match test {
        TestChoice::Known => (
            require(args.delta, "delta").context("--test known needs the bump height")?,
            require(args.kappa_sq, "kappa-sq").context("--test known needs kappa^2")?,
        ),
        TestChoice::Adaptive => (
            0.0,
            require(args.kappa_sq, "kappa-sq").context("--test adaptive needs kappa^2")?,
        ),
        TestChoice::Homogeneous => (0.0, 0.0),
    };
    let params = HbrParams::new(
        values.len(),
        bump_width,
        delta,
        sigma0_sq,
        kappa_sq * sigma0_sq,
        alpha,
    )?;
    let obs = Observations {
        values,
        params,
        true_window: None,
    };
    let outcome = match test {
        TestChoice::Known => scan::test_known(&obs)?,
        TestChoice::Adaptive => scan::test_adaptive(&obs)?,
        TestChoice::Homogeneous => scan::test_homogeneous(&obs)?,
    };
    let json = serde_json::to_string_pretty(&outcome)? + "\n";
    write_output(args.out.as_deref(), json.as_bytes())?;
    Ok(if outcome.reject { EXIT_REJECT } else { EXIT_OK })
}

// ---------------------------------------------------------------------------
// power
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetChoice {
    Small,
    Medium,
    Large,
}

impl From<PresetChoice> for Preset {
    fn from(p: PresetChoice) -> Self {
        match p {
            PresetChoice::Small => Preset::Small,
            PresetChoice::Medium => Preset::Medium,
            PresetChoice::Large => Preset::Large,
        }
    }
}

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct PowerArgs {
    /// Sample-size preset: small (829, 0.1), medium (2157, 0.05),
    /// large (5312, 0.025)
    #[arg(long, value_enum, conflicts_with_all = ["n", "bump_width"])]
    preset: Option<PresetChoice>,
    /// Explicit sample count (with --bump-width)
    #[arg(long)]
    n: Option<usize>,
    /// Explicit bump width (with --n)
    #[arg(long)]
    bump_width: Option<f64>,
    /// Which test to evaluate (default known)
    #[arg(long, value_enum)]
    test: Option<TestChoice>,
    /// Monte Carlo replications per grid cell (default 10000)
    #[arg(long)]
    replications: Option<u64>,
    /// RNG seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Significance level (default 0.05)
    #[arg(long)]
    alpha: Option<f64>,
    /// Baseline variance (default 1)
    #[arg(long)]
    sigma0_sq: Option<f64>,
    /// Delta axis: comma list or start:step:end (default 0.01:0.01:0.70)
    #[arg(long)]
    delta_axis: Option<String>,
    /// kappa^2 axis: comma list or start:step:end (default 0.01:0.01:1.20)
    #[arg(long)]
    kappa_sq_axis: Option<String>,
    /// Put the bump in this fixed window instead of a random one per
    /// replication
    #[arg(long)]
    fixed_window: Option<usize>,
    /// Estimate the null rejection rate instead of power
    #[arg(long)]
    level: bool,
    /// Output CSV path (stdout when absent); a .config.json sidecar records
    /// the full configuration
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn power(mut args: PowerArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: PowerArgs = load_config(config)?;
    overlay_options!(args, cfg: preset, n, bump_width, test, replications, seed, alpha,
                     sigma0_sq, delta_axis, kappa_sq_axis, fixed_window, out);
    args.level = args.level || cfg.level;

    let (n, bump_width) = match (args.preset, args.n, args.bump_width) {
        (Some(p), None, None) => {
            let p: Preset = p.into();
            (p.n(), p.bump_width())
        }
        (None, Some(n), Some(w)) => (n, w),
        _ => bail!("either --preset or both --n and --bump-width are required"),
    };
    let sigma0_sq = args.sigma0_sq.unwrap_or(1.0);
    let delta_axis = match &args.delta_axis {
        Some(s) => parse_list(s)?,
        None => paper_delta_axis(),
    };
    let kappa_axis = match &args.kappa_sq_axis {
        Some(s) => parse_list(s)?,
        None => paper_kappa_sq_axis(),
    };
    let which_test = match args.test.unwrap_or(TestChoice::Known) {
        TestChoice::Known => TestKind::Known,
        TestChoice::Adaptive => TestKind::Adaptive,
        TestChoice::Homogeneous => TestKind::Homogeneous,
    };
    let hypothesis = if args.level {
        Hypothesis::Null
    } else {
        match args.fixed_window {
            Some(j) => Hypothesis::Alt(WindowChoice::Fixed(j)),
            None => Hypothesis::Alt(WindowChoice::UniformRandom),
        }
    };
    let template = McConfig {
        replications: args.replications.unwrap_or(10_000),
        seed: args.seed.unwrap_or(0),
        which_test,
        params: HbrParams::new(
            n,
            bump_width,
            delta_axis[0],
            sigma0_sq,
            kappa_axis[0] * sigma0_sq,
            args.alpha.unwrap_or(0.05),
        )?,
        hypothesis,
    };
    let grid = power_surface(&template, &delta_axis, &kappa_axis)?;

    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    write_output(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&serde_json::json!({
            "config": grid.config,
            "delta_axis": grid.delta_axis,
            "kappa_sq_axis": grid.kappa_sq_axis,
        }))?;
        fs::write(sidecar_path(out, ".config.json"), json + "\n")?;
    }
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// boundary
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateChoice {
    Mean,
    Variance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideChoice {
    Lower,
    Upper,
}

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct BoundaryArgs {
    /// Regime parameter c = lim sigman^2/(delta sigma0); accepts `inf`
    #[arg(long)]
    c: Option<f64>,
    /// Baseline standard deviation (default 1)
    #[arg(long)]
    sigma0: Option<f64>,
    /// Query a single constant on this rate scale (default: emit the full
    /// table)
    #[arg(long, value_enum)]
    rate: Option<RateChoice>,
    /// Side for a single-constant query (default upper)
    #[arg(long, value_enum)]
    side: Option<SideChoice>,
    /// Adaptive (unknown-delta) constant for a single-constant query
    #[arg(long)]
    adaptive: bool,
    /// Also emit the relaxed (non-vanishing kappa) constants
    #[arg(long)]
    relaxed: bool,
    /// kappa for the relaxed constants
    #[arg(long)]
    kappa: Option<f64>,
    /// Emit samples of the price-of-adaptation curve r(c) as CSV instead
    #[arg(long)]
    price_curve: bool,
    /// Largest c on the price curve (default 10)
    #[arg(long)]
    price_max: Option<f64>,
    /// Number of price-curve samples (default 201)
    #[arg(long)]
    price_samples: Option<usize>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn boundary(mut args: BoundaryArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: BoundaryArgs = load_config(config)?;
    overlay_options!(args, cfg: c, sigma0, rate, side, kappa, price_max, price_samples, out);
    args.adaptive = args.adaptive || cfg.adaptive;
    args.relaxed = args.relaxed || cfg.relaxed;
    args.price_curve = args.price_curve || cfg.price_curve;

    if args.price_curve {
        let max = args.price_max.unwrap_or(10.0);
        let samples = args.price_samples.unwrap_or(201).max(2);
        let mut csv = String::from("c,r\n");
        for i in 0..samples {
            let c = max * i as f64 / (samples - 1) as f64;
            csv.push_str(&format!("{:.6},{:.12}\n", c, price_of_adaptation(c)?));
        }
        write_output(args.out.as_deref(), csv.as_bytes())?;
        return Ok(EXIT_OK);
    }

    let c = require(args.c, "c")?;
    let sigma0 = args.sigma0.unwrap_or(1.0);
    let regime = classify_regime(c)?;

    let constants = if args.rate.is_some() || args.side.is_some() || args.adaptive {
        let rate = match args.rate {
            Some(RateChoice::Mean) => RateScale::MeanRate,
            Some(RateChoice::Variance) => RateScale::VarianceRate,
            None => match regime.kind {
                RegimeKind::Dvr => RateScale::VarianceRate,
                _ => RateScale::MeanRate,
            },
        };
        let side = match args.side {
            Some(SideChoice::Lower) => Side::Lower,
            _ => Side::Upper,
        };
        vec![boundary_constant(&regime, sigma0, rate, side, args.adaptive)?]
    } else {
        boundary_table(&regime, sigma0)?
    };

    let relaxed = if args.relaxed {
        let kappa = require(args.kappa, "kappa").context("--relaxed needs --kappa")?;
        let kinds: &[(&str, RelaxedKind)] = match regime.kind {
            RegimeKind::Er => &[
                ("er-lower", RelaxedKind::ErLower),
                ("er-upper", RelaxedKind::ErUpper),
            ],
            RegimeKind::Dvr => &[
                ("dvr-lower", RelaxedKind::DvrLower),
                ("dvr-upper", RelaxedKind::DvrUpper),
            ],
            RegimeKind::Dmr => bail!("relaxed constants exist only in the ER and DVR"),
        };
        let mut map = serde_json::Map::new();
        for (name, kind) in kinds {
            map.insert(
                name.to_string(),
                serde_json::json!(relaxed_constant(*kind, c, kappa)?),
            );
        }
        Some(serde_json::Value::Object(map))
    } else {
        None
    };

    let mut doc = serde_json::json!({
        "regime": regime,
        "price_of_adaptation": price_of_adaptation(c)?,
        "constants": constants,
    });
    if let Some(r) = relaxed {
        doc["relaxed"] = r;
    }
    let json = serde_json::to_string_pretty(&doc)? + "\n";
    write_output(args.out.as_deref(), json.as_bytes())?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// tails
// ---------------------------------------------------------------------------

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct TailsArgs {
    /// Comma-separated weights b_i
    #[arg(long)]
    weights: Option<String>,
    /// Comma-separated degrees of freedom d_i
    #[arg(long)]
    dofs: Option<String>,
    /// Comma-separated noncentralities a_i^2 (default all zero)
    #[arg(long)]
    noncentralities: Option<String>,
    /// Deviation levels x: comma list or start:step:end (default 0.5,1,2,4)
    #[arg(long)]
    x_grid: Option<String>,
    /// Monte Carlo draws for the empirical tail (default 1000000)
    #[arg(long)]
    mc_draws: Option<u64>,
    /// RNG seed (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn tails(mut args: TailsArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: TailsArgs = load_config(config)?;
    overlay_options!(args, cfg: weights, dofs, noncentralities, x_grid, mc_draws, seed, out);

    let weights = parse_list(&require(args.weights, "weights")?)?;
    let dofs: Vec<u32> = parse_usize_list(&require(args.dofs, "dofs")?)?
        .into_iter()
        .map(|d| d as u32)
        .collect();
    let noncentralities = match &args.noncentralities {
        Some(s) => parse_list(s)?,
        None => vec![0.0; weights.len()],
    };
    let xs = match &args.x_grid {
        Some(s) => parse_list(s)?,
        None => vec![0.5, 1.0, 2.0, 4.0],
    };
    let spec = DeviationSpec::from_parts(&weights, &dofs, &noncentralities)?;
    let draws = args.mc_draws.unwrap_or(1_000_000);
    let seed = args.seed.unwrap_or(0);

    use rayon::prelude::*;
    let sample: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|r| spec.sample_with(&mut RngStream::new(seed, r).sampler()))
        .collect();

    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut csv = String::from("x,paper_bound,dr_bound,bental_bound,hsu_bound,sz_bound,mc_tail,mc_se\n");
    for &x in &xs {
        let paper = tail_upper_threshold(&spec, x)?;
        let cb = comparison_bounds(&spec, x)?;
        let exceed = sample.iter().filter(|&&v| v > paper).count() as f64 / draws as f64;
        let se = (exceed * (1.0 - exceed) / draws as f64).sqrt();
        csv.push_str(&format!(
            "{x:.6},{paper:.6},{:.6},{:.6},{},{},{exceed:.6e},{se:.6e}\n",
            cb.rohde_dumbgen,
            cb.ben_tal,
            fmt_opt(cb.hsu),
            fmt_opt(cb.spokoiny_zhilova),
        ));
    }
    write_output(args.out.as_deref(), csv.as_bytes())?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// condition
// ---------------------------------------------------------------------------

#[derive(clap::Args, Serialize, Deserialize, Default)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConditionArgs {
    /// Sample counts n_k (comma list)
    #[arg(long)]
    n: Option<String>,
    /// Bump widths |I|_k (comma list; scalars broadcast)
    #[arg(long)]
    bump_width: Option<String>,
    /// Bump heights delta_k (comma list; scalars broadcast)
    #[arg(long)]
    delta: Option<String>,
    /// Variance bumps kappa^2_k (comma list; scalars broadcast)
    #[arg(long)]
    kappa_sq: Option<String>,
    /// Auxiliary tilts delta_n of the condition (comma list; scalars
    /// broadcast); each must satisfy tilt * kappa^2 < 1
    #[arg(long)]
    tilt: Option<String>,
    /// Baseline variance (default 1)
    #[arg(long)]
    sigma0_sq: Option<f64>,
    /// Output CSV path (stdout when absent); a .verdict.json sidecar records
    /// the divergence diagnostic
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn condition(mut args: ConditionArgs, config: Option<&Path>) -> Result<ExitCode> {
    let cfg: ConditionArgs = load_config(config)?;
    overlay_options!(args, cfg: n, bump_width, delta, kappa_sq, tilt, sigma0_sq, out);

    let ns = parse_usize_list(&require(args.n, "n")?)?;
    let widths = parse_list(&require(args.bump_width, "bump-width")?)?;
    let deltas = parse_list(&require(args.delta, "delta")?)?;
    let kappas = parse_list(&require(args.kappa_sq, "kappa-sq")?)?;
    let tilts = parse_list(&require(args.tilt, "tilt")?)?;
    let sigma0_sq = args.sigma0_sq.unwrap_or(1.0);

    let len = ns
        .len()
        .max(widths.len())
        .max(deltas.len())
        .max(kappas.len())
        .max(tilts.len());
    let ns = broadcast("n", ns, len)?;
    let widths = broadcast("bump-width", widths, len)?;
    let deltas = broadcast("delta", deltas, len)?;
    let kappas = broadcast("kappa-sq", kappas, len)?;
    let tilts = broadcast("tilt", tilts, len)?;

    let mut points = Vec::with_capacity(len);
    for k in 0..len {
        if tilts[k] * kappas[k] >= 1.0 {
            bail!(
                "schedule point k={k}: tilt * kappa^2 = {} >= 1 is outside the domain",
                tilts[k] * kappas[k]
            );
        }
        points.push(ConditionPoint {
            n: ns[k],
            bump_width: widths[k],
            delta: deltas[k],
            kappa_sq: kappas[k],
            sigma0_sq,
            tilt: tilts[k],
        });
    }
    let values = condition_schedule(&points)
        .map_err(|e| anyhow!("schedule evaluation failed: {e}"))?;

    let mut csv = String::from("k,n,value\n");
    for (k, (point, value)) in points.iter().zip(&values).enumerate() {
        csv.push_str(&format!("{k},{},{value:.12e}\n", point.n));
    }
    write_output(args.out.as_deref(), csv.as_bytes())?;

    let verdict = diverges_downward(&values);
    eprintln!("diverges-downward: {verdict}");
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&serde_json::json!({
            "diverges_downward": verdict,
            "values": values,
        }))?;
        fs::write(sidecar_path(out, ".verdict.json"), json + "\n")?;
    }
    Ok(EXIT_OK)
}

