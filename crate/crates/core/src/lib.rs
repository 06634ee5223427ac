//! Run statistics for the coin tossing experiment.
//!
//! A *T-contaminated run of heads* is a window of consecutive tosses in
//! which every outcome is heads except for at most (or exactly) `T` tails.
//! This crate provides, for i.i.d. Bernoulli(p) tosses:
//!
//! - [`run_scan`]: deterministic scanning of bit sequences for the longest
//!   contaminated run `mu(N)`, first hitting times `tau_m`, and window
//!   events, in whole-array and single-pass streaming form;
//! - [`theory`]: closed-form centering sequences, accompanying
//!   distributions (classical and corrected), hitting-time limits, and the
//!   Csaki-Foldes-Komlos probability sandwich;
//! - [`exact_oracle`]: ground-truth probabilities with no asymptotics,
//!   via exhaustive enumeration (tiny `N`) and a transfer-matrix dynamic
//!   program over zero-position automaton states (`N` up to 10^7);
//! - [`simulation`]: seeded, reproducible Monte Carlo replication of the
//!   experiments, with Kolmogorov-distance scoring against the theory.
//!
//! All indices in the public API are 1-based, matching the convention
//! `X_1, ..., X_N` for the toss sequence.

pub mod error;
pub mod exact_oracle;
pub mod numeric;
pub mod run_scan;
pub mod simulation;
pub mod theory;

pub use error::Error;
pub use exact_oracle::WindowMode;
pub use run_scan::{BitSequence, RunParams, StreamScanner};
pub use simulation::{EmpiricalDistribution, KsReport, SimulationConfig, TheoryKind};
pub use theory::{CenteringResult, CoinSpec, SandwichBounds, TheoryParams};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
