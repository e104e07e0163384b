//! Power-law exponent estimators over rank series.
//!
//! Four methods share one result type. Exponent conventions:
//! zeta is the Zipf-plot slope magnitude (log value vs log rank),
//! zeta' = 1/zeta is the tail exponent of P(X > x) ~ x^-zeta'.
//! A density tail then falls off as x^-(zeta'+1).

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::ols::fit_line;
use super::{FitError, RankSeries};

/// Log-binned densities use this many bins per decade, anchored on the
/// absolute grid 10^(k/10) so fits over overlapping ranges share bin edges.
pub(crate) const BINS_PER_DECADE: f64 = 10.0;
/// Bins holding fewer samples than this are dropped before fitting.
pub(crate) const MIN_BIN_COUNT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// log value regressed on log rank; slope magnitude is zeta.
    OlsZipf,
    /// log(rank - 1/2) regressed on log value; slope magnitude is zeta'.
    /// The half-rank shift removes the leading small-sample bias of the
    /// plain rank regression on sampled data.
    GiRankHalf,
    /// log-binned density fit; slope is -(zeta' + 1).
    PdfTail,
    /// empirical tail P(X > x) fit; slope is -zeta'.
    Ccdf,
}

impl FitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitMethod::OlsZipf => "ols_zipf",
            FitMethod::GiRankHalf => "gi_rank_half",
            FitMethod::PdfTail => "pdf_tail",
            FitMethod::Ccdf => "ccdf",
        }
    }

    /// Rank methods take rank ranges; the other two take value ranges.
    pub fn uses_rank_range(&self) -> bool {
        matches!(self, FitMethod::OlsZipf | FitMethod::GiRankHalf)
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitMethod {
    type Err = FitError;

    fn from_str(s: &str) -> Result<Self, FitError> {
        match s {
            "ols_zipf" | "ols" => Ok(FitMethod::OlsZipf),
            "gi_rank_half" | "gi" => Ok(FitMethod::GiRankHalf),
            "pdf_tail" | "pdf" => Ok(FitMethod::PdfTail),
            "ccdf" => Ok(FitMethod::Ccdf),
            other => Err(FitError::Domain(format!("unknown fit method {other:?}"))),
        }
    }
}

/// Fit window. Rank bounds are 1-based inclusive; value bounds are inclusive
/// on both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitRange {
    /// Whole series: ranks 1..=n, or values [min, max].
    All,
    Ranks(usize, usize),
    Values(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub method: FitMethod,
    pub zeta: f64,
    pub zeta_prime: f64,
    /// Standard error of the slope the method actually regresses:
    /// SE(zeta) for ols_zipf, the closed form zeta'*sqrt(2/n) for
    /// gi_rank_half, SE(zeta'+1) for pdf_tail, SE(zeta') for ccdf.
    pub stderr: f64,
    /// Intercept of the fitted line in log space (the regression run by the
    /// method, see [`fitted_value_at_rank`] for the inversions).
    pub intercept: f64,
    pub n_used: usize,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl PowerLawFit {
    /// Builds a fit result, enforcing zeta > 0 and zeta' = 1/zeta.
    pub fn new(
        method: FitMethod,
        zeta: f64,
        intercept: f64,
        stderr: f64,
        n_used: usize,
        range_lo: f64,
        range_hi: f64,
    ) -> Result<Self, FitError> {
        if !zeta.is_finite() || zeta <= 0.0 {
            return Err(FitError::Degenerate(format!(
                "fitted exponent must be positive, got {zeta}"
            )));
        }
        if n_used < 3 {
            return Err(FitError::InsufficientData {
                needed: 3,
                got: n_used,
            });
        }
        Ok(PowerLawFit {
            method,
            zeta,
            zeta_prime: 1.0 / zeta,
            stderr,
            intercept,
            n_used,
            range_lo,
            range_hi,
        })
    }

    /// Density prefactor exp(intercept); meaningful for pdf_tail fits, where
    /// the fitted model is density = prefactor * x^-(zeta'+1).
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn fit_power_law(
    series: &RankSeries,
    method: FitMethod,
    range: FitRange,
) -> Result<PowerLawFit, FitError> {
    match method {
        FitMethod::OlsZipf => {
            let (lo, hi) = rank_bounds(series, range)?;
            fit_ols_zipf(series, lo, hi)
        }
        FitMethod::GiRankHalf => {
            let (lo, hi) = rank_bounds(series, range)?;
            fit_gi(series, lo, hi)
        }
        FitMethod::PdfTail => {
            let (lo, hi) = value_bounds(series, range)?;
            fit_pdf_tail(series, lo, hi)
        }
        FitMethod::Ccdf => {
            let (lo, hi) = value_bounds(series, range)?;
            fit_ccdf(series, lo, hi)
        }
    }
}

fn rank_bounds(series: &RankSeries, range: FitRange) -> Result<(usize, usize), FitError> {
    let n = series.len();
    match range {
        FitRange::All => Ok((1, n)),
        FitRange::Ranks(lo, hi) => {
            if lo < 1 || hi > n || lo >= hi {
                return Err(FitError::InvalidRange(format!(
                    "rank range {lo}..{hi} outside series of length {n}"
                )));
            }
            Ok((lo, hi))
        }
        FitRange::Values(..) => Err(FitError::InvalidRange(
            "this method takes a rank range, not value bounds".to_string(),
        )),
    }
}

fn value_bounds(series: &RankSeries, range: FitRange) -> Result<(f64, f64), FitError> {
    match range {
        FitRange::All => {
            let vals = series.values();
            Ok((vals[series.len() - 1], vals[0]))
        }
        FitRange::Values(lo, hi) => {
            if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || lo >= hi {
                return Err(FitError::InvalidRange(format!(
                    "value bounds must satisfy 0 < lo < hi, got {lo}..{hi}"
                )));
            }
            Ok((lo, hi))
        }
        FitRange::Ranks(..) => Err(FitError::InvalidRange(
            "this method takes value bounds, not a rank range".to_string(),
        )),
    }
}

fn fit_ols_zipf(series: &RankSeries, lo: usize, hi: usize) -> Result<PowerLawFit, FitError> {
    let xs: Vec<f64> = (lo..=hi).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=hi)
        .map(|r| series.value_at_rank(r).ln())
        .collect();
    let line = fit_line(&xs, &ys)?;
    if line.slope >= 0.0 {
        return Err(FitError::Degenerate(format!(
            "Zipf slope must be negative, got {}",
            line.slope
        )));
    }
    PowerLawFit::new(
        FitMethod::OlsZipf,
        -line.slope,
        line.intercept,
        line.slope_se,
        line.n,
        lo as f64,
        hi as f64,
    )
}

fn fit_gi(series: &RankSeries, lo: usize, hi: usize) -> Result<PowerLawFit, FitError> {
    let xs: Vec<f64> = (lo..=hi)
        .map(|r| series.value_at_rank(r).ln())
        .collect();
    let ys: Vec<f64> = (lo..=hi).map(|r| (r as f64 - 0.5).ln()).collect();
    let line = fit_line(&xs, &ys)?;
    if line.slope >= 0.0 {
        return Err(FitError::Degenerate(format!(
            "tail slope must be negative, got {}",
            line.slope
        )));
    }
    let zeta_prime = -line.slope;
    let stderr = zeta_prime * (2.0 / line.n as f64).sqrt();
    PowerLawFit::new(
        FitMethod::GiRankHalf,
        1.0 / zeta_prime,
        line.intercept,
        stderr,
        line.n,
        lo as f64,
        hi as f64,
    )
}

/// One log bin after clipping to the requested value range.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// count / (total sample size * bin width); normalized against the whole
    /// sample so the fitted prefactor is a pdf-scale constant.
    pub density: f64,
}

impl LogBin {
    pub fn center(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

/// Bins values into the absolute log grid 10^(k/10) clipped at [lo, hi],
/// dropping bins with fewer than MIN_BIN_COUNT samples.
pub(crate) fn log_binned_density(values: &[f64], lo: f64, hi: f64) -> Vec<LogBin> {
    let n_total = values.len() as f64;
    let k_first = (BINS_PER_DECADE * lo.log10()).floor() as i64;
    let k_last = (BINS_PER_DECADE * hi.log10()).ceil() as i64;

    let edge = |k: i64| 10f64.powf(k as f64 / BINS_PER_DECADE);
    let mut bins: Vec<(i64, LogBin)> = Vec::new();
    for k in k_first..k_last {
        let b_lo = edge(k).max(lo);
        let b_hi = edge(k + 1).min(hi);
        if b_lo < b_hi {
            bins.push((
                k,
                LogBin {
                    lo: b_lo,
                    hi: b_hi,
                    count: 0,
                    density: 0.0,
                },
            ));
        }
    }
    if bins.is_empty() {
        return Vec::new();
    }

    let k_min = bins.first().unwrap().0;
    let k_max = bins.last().unwrap().0;
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        // Clamping absorbs boundary values (v == hi) and float edge effects.
        let k = ((BINS_PER_DECADE * v.log10()).floor() as i64).clamp(k_min, k_max);
        if let Ok(idx) = bins.binary_search_by_key(&k, |(k, _)| *k) {
            bins[idx].1.count += 1;
        }
    }

    bins.into_iter()
        .map(|(_, mut b)| {
            b.density = b.count as f64 / (n_total * (b.hi - b.lo));
            b
        })
        .filter(|b| b.count >= MIN_BIN_COUNT)
        .collect()
}

fn fit_pdf_tail(series: &RankSeries, lo: f64, hi: f64) -> Result<PowerLawFit, FitError> {
    let bins = log_binned_density(series.values(), lo, hi);
    if bins.len() < 3 {
        return Err(FitError::InsufficientData {
            needed: 3,
            got: bins.len(),
        });
    }
    let xs: Vec<f64> = bins.iter().map(|b| b.center().ln()).collect();
    let ys: Vec<f64> = bins.iter().map(|b| b.density.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    // slope = -(zeta' + 1), so anything above -1 has no tail-exponent reading
    let zeta_prime = -line.slope - 1.0;
    if zeta_prime <= 0.0 {
        return Err(FitError::Degenerate(format!(
            "density slope {} is too shallow for a power-law tail",
            line.slope
        )));
    }
    PowerLawFit::new(
        FitMethod::PdfTail,
        1.0 / zeta_prime,
        line.intercept,
        line.slope_se,
        bins.len(),
        lo,
        hi,
    )
}

fn fit_ccdf(series: &RankSeries, lo: f64, hi: f64) -> Result<PowerLawFit, FitError> {
    let vals = series.values();
    let n_total = vals.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..vals.len() {
        if i > 0 && vals[i] == vals[i - 1] {
            continue; // first occurrence already contributed
        }
        // i values are strictly greater than vals[i]; i = 0 has no tail mass.
        if i == 0 || vals[i] < lo || vals[i] > hi {
            continue;
        }
        xs.push(vals[i].ln());
        ys.push((i as f64 / n_total).ln());
    }
    if xs.len() < 3 {
        return Err(FitError::InsufficientData {
            needed: 3,
            got: xs.len(),
        });
    }
    let line = fit_line(&xs, &ys)?;
    if line.slope >= 0.0 {
        return Err(FitError::Degenerate(format!(
            "tail slope must be negative, got {}",
            line.slope
        )));
    }
    let zeta_prime = -line.slope;
    PowerLawFit::new(
        FitMethod::Ccdf,
        1.0 / zeta_prime,
        line.intercept,
        line.slope_se,
        line.n,
        lo,
        hi,
    )
}

/// Model value at a 1-based rank, inverting each method's fitted line back
/// into rank space (for plot emission):
/// ols_zipf: v = exp(intercept - zeta*ln r);
/// gi_rank_half: v = exp((intercept - ln(r - 1/2)) / zeta');
/// ccdf: P(>v) = exp(intercept)*v^-zeta' equated to r/n;
/// pdf_tail: tail integral P(>v) = exp(intercept)/zeta' * v^-zeta' likewise.
pub fn fitted_value_at_rank(fit: &PowerLawFit, rank: usize, n_total: usize) -> f64 {
    assert!(rank >= 1, "ranks are 1-based");
    let r = rank as f64;
    match fit.method {
        FitMethod::OlsZipf => (fit.intercept - fit.zeta * r.ln()).exp(),
        FitMethod::GiRankHalf => ((fit.intercept - (r - 0.5).ln()) / fit.zeta_prime).exp(),
        FitMethod::Ccdf => {
            let log_p = (r / n_total as f64).ln();
            ((fit.intercept - log_p) / fit.zeta_prime).exp()
        }
        FitMethod::PdfTail => {
            let log_p = (r / n_total as f64).ln();
            ((fit.intercept - fit.zeta_prime.ln() - log_p) / fit.zeta_prime).exp()
        }
    }
}
