//! Scaling estimators for heavy-tailed data.
//!
//! Everything here operates on a [`RankSeries`]: values sorted descending,
//! rank 1 being the largest. Rank 1 = largest is the convention used across
//! the whole crate, including the sign convention of the risk statistics.

mod crossover;
mod ols;
mod power_law;
mod stretched;

pub use crossover::{detect_crossover, CrossoverFit, DEFAULT_MIN_SEGMENT};
pub use power_law::{fit_power_law, fitted_value_at_rank, FitMethod, FitRange, PowerLawFit};
pub use stretched::{fit_stretched_exponential, StretchedExpFit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no positive values in input")]
    EmptyInput,
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Positive values sorted descending; rank r (1-based) indexes the r-th
/// largest. Construction goes through [`build_rank_series`], which is what
/// guarantees the ordering invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSeries {
    values: Vec<f64>,
}

impl RankSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at 1-based rank. Panics if rank is 0 or past the end.
    pub fn value_at_rank(&self, rank: usize) -> f64 {
        self.values[rank - 1]
    }
}

/// Sorts positive finite values descending (stable for ties) and counts how
/// many inputs were dropped for being non-positive or non-finite.
pub fn build_rank_series(values: &[f64]) -> Result<(RankSeries, usize), FitError> {
    let mut kept: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let rejected = values.len() - kept.len();
    if kept.is_empty() {
        return Err(FitError::EmptyInput);
    }
    kept.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
    Ok((RankSeries { values: kept }, rejected))
}

/// R-squared of a straight line through the log-log rank plot over the
/// 1-based inclusive rank window. A gauge of how power-law-like a stretch of
/// the plot is, separate from the exponent estimate itself.
pub fn rank_plot_r_squared(series: &RankSeries, lo: usize, hi: usize) -> Result<f64, FitError> {
    if lo < 1 || hi > series.len() || lo >= hi {
        return Err(FitError::InvalidRange(format!(
            "rank range {lo}..{hi} outside series of length {}",
            series.len()
        )));
    }
    let xs: Vec<f64> = (lo..=hi).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|r| series.value_at_rank(r).ln()).collect();
    Ok(ols::fit_line(&xs, &ys)?.r_squared)
}

/// Converts between the two exponent conventions: a Zipf-plot slope zeta maps
/// to the tail exponent zeta' = 1/zeta and vice versa (the map is an
/// involution).
pub fn convert_exponent(zeta: f64) -> Result<f64, FitError> {
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(FitError::Domain(format!(
            "exponent must be positive and finite, got {zeta}"
        )));
    }
    Ok(1.0 / zeta)
}
