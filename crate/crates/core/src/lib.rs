//! Bump detection in the heterogeneous bump regression (HBR) model.
//!
//! The HBR model observes `Y_i = Δ·1{i/n ∈ I} + sqrt(σ0² + σn²·1{i/n ∈ I})·Z_i`
//! with standard Gaussian errors: a mean bump of height Δ on an unknown grid
//! interval I comes with a simultaneous variance bump σn². This crate provides
//!
//! * the model types and seeded synthetic-data generation ([`model`]),
//! * deviation inequalities and moments for weighted non-central chi-squared
//!   sums ([`chi2`]),
//! * likelihood-ratio scan tests with non-asymptotic thresholds ([`scan`]),
//! * detection-boundary constants for the dominant-mean, equilibrium and
//!   dominant-variance regimes ([`boundary`]),
//! * a deterministic, parallel Monte Carlo harness for level and power
//!   estimation ([`mc`]).
//!
//! All randomness flows through counter-based [`rng::RngStream`] values keyed
//! by `(seed, substream)`, so every result is reproducible bit-for-bit
//! regardless of thread count.

pub mod boundary;
pub mod chi2;
pub mod error;
pub mod mc;
pub mod model;
pub mod norm;
pub mod rng;
pub mod scan;

pub use boundary::{
    classify_regime, lower_bound_condition_value, price_of_adaptation, sample_size_reduction,
    BoundaryResult, RateScale, Regime, RegimeKind, Side,
};
pub use chi2::{ChiTerm, DeviationSpec, LrMomentParams};
pub use error::HbrError;
pub use mc::{Hypothesis, McConfig, PowerGrid, Preset, TestKind};
pub use model::{candidate_windows, generate_h0, generate_h1, HbrParams, Observations, WindowGrid};
pub use norm::normal_quantile;
pub use rng::RngStream;
pub use scan::{test_adaptive, test_homogeneous, test_known, TestOutcome};
