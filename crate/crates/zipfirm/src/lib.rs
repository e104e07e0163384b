//! Simulation and estimation toolkit for heavy-tailed firm size data.
//!
//! The crate has four parts:
//!
//! - [`firmdata`]: empirical firm records, CSV ingestion, monetary deflation,
//!   and versioned text snapshots (shared by all modules).
//! - [`simonsim`]: a discrete-time economy where asset units attach to firms
//!   preferentially, debt grows alongside, and firms can go bankrupt or merge.
//! - [`scalefit`]: rank-series construction and every scaling estimator
//!   (Zipf OLS, rank-1/2 regression, pdf-tail and CCDF fits, two-regime
//!   crossover detection, stretched-exponential fit).
//! - [`riskstats`]: leverage-ratio statistics: histograms, size splits, the
//!   Mann-Whitney U test, and Bayes composition of conditional failure
//!   probability.
//!
//! All randomness is driven by a seeded counter-based generator; identical
//! configurations replay identical runs, and snapshots capture the stream
//! position so a resumed run is indistinguishable from an uninterrupted one.

pub mod firmdata;
pub mod riskstats;
pub mod scalefit;
pub mod simonsim;
