//! Statistics over debt-to-asset ratios: ratio extraction from filing data,
//! linear-bin densities, size-based sample splits, the Mann–Whitney U test,
//! and Bayesian composition of two ratio tail fits into a conditional
//! bankruptcy probability curve.

mod mwu;

pub use mwu::{mann_whitney_u, UTestResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::firmdata::Dataset;
use crate::scalefit::PowerLawFit;

/// Ratios at or above this are treated as data errors by default and dropped.
pub const DEFAULT_TRUNCATION: f64 = 4.0;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("sample carries no size values")]
    MissingSizes,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("incompatible fits: {0}")]
    FitMismatch(String),
}

/// Which population a ratio sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioSource {
    /// Firms observed at a bankruptcy filing.
    Bankrupt,
    /// Firms observed as a going concern.
    Existing,
}

impl RatioSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            RatioSource::Bankrupt => "bankrupt",
            RatioSource::Existing => "existing",
        }
    }
}

/// A sample of debt-to-asset ratios, optionally tagged with per-firm sizes
/// (assets, parallel to `ratios`) and the year span it covers.
///
/// Empty samples are representable (a size split can empty one side); the
/// operations that need data reject them individually.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSample {
    ratios: Vec<f64>,
    source: RatioSource,
    sizes: Option<Vec<f64>>,
    period: Option<(i32, i32)>,
}

impl RatioSample {
    /// Every ratio must be finite and positive.
    pub fn new(ratios: Vec<f64>, source: RatioSource) -> Result<Self, RiskError> {
        if let Some(bad) = ratios.iter().find(|r| !r.is_finite() || **r <= 0.0) {
            return Err(RiskError::InvalidInput(format!(
                "ratios must be finite and positive, got {bad}"
            )));
        }
        Ok(RatioSample {
            ratios,
            source,
            sizes: None,
            period: None,
        })
    }

    /// Attaches firm sizes, one per ratio and in the same order.
    pub fn with_sizes(mut self, sizes: Vec<f64>) -> Result<Self, RiskError> {
        if sizes.len() != self.ratios.len() {
            return Err(RiskError::InvalidInput(format!(
                "{} sizes for {} ratios",
                sizes.len(),
                self.ratios.len()
            )));
        }
        if let Some(bad) = sizes.iter().find(|s| !s.is_finite() || **s <= 0.0) {
            return Err(RiskError::InvalidInput(format!(
                "sizes must be finite and positive, got {bad}"
            )));
        }
        self.sizes = Some(sizes);
        Ok(self)
    }

    pub fn with_period(mut self, lo: i32, hi: i32) -> Self {
        self.period = Some((lo, hi));
        self
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn source(&self) -> RatioSource {
        self.source
    }

    pub fn sizes(&self) -> Option<&[f64]> {
        self.sizes.as_deref()
    }

    pub fn period(&self) -> Option<(i32, i32)> {
        self.period
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioOutcome {
    pub sample: RatioSample,
    /// Ratios dropped because they were at or above the truncation point.
    pub excluded: usize,
}

/// Computes one debt-to-asset ratio per record that reports both petition
/// assets and petition debt; other records contribute nothing. Ratios at or
/// above `truncate_at` are dropped and counted in the outcome. Sizes come
/// from petition assets and the period from the contributing records' years.
pub fn compute_ratios(
    ds: &Dataset,
    truncate_at: f64,
    source: RatioSource,
) -> Result<RatioOutcome, RiskError> {
    if !truncate_at.is_finite() || truncate_at <= 0.0 {
        return Err(RiskError::InvalidInput(format!(
            "truncation point must be positive, got {truncate_at}"
        )));
    }
    let mut ratios = Vec::new();
    let mut sizes = Vec::new();
    let mut years: Option<(i32, i32)> = None;
    let mut excluded = 0usize;
    for rec in &ds.records {
        let Some(ratio) = rec.leverage_ratio() else {
            continue;
        };
        if ratio >= truncate_at {
            excluded += 1;
            continue;
        }
        ratios.push(ratio);
        sizes.push(rec.petition_assets.expect("ratio implies assets"));
        years = Some(match years {
            None => (rec.year, rec.year),
            Some((lo, hi)) => (lo.min(rec.year), hi.max(rec.year)),
        });
    }
    if ratios.is_empty() {
        return Err(RiskError::EmptySample(format!(
            "no usable ratios below {truncate_at} ({excluded} truncated)"
        )));
    }
    let mut sample = RatioSample::new(ratios, source)?.with_sizes(sizes)?;
    if let Some((lo, hi)) = years {
        sample = sample.with_period(lo, hi);
    }
    Ok(RatioOutcome { sample, excluded })
}

/// One linear histogram bin. `density` is count / (n_total * width), so the
/// densities integrate to the fraction of the sample inside the range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub density: f64,
}

impl HistBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bins `sample` into uniform-width bins covering `range`. Values outside
/// the closed range are ignored; a value exactly at the upper edge lands in
/// the last bin. The last bin may extend past `range.1` when the width does
/// not divide the range evenly.
pub fn histogram_pdf(
    sample: &RatioSample,
    bin_width: f64,
    range: (f64, f64),
) -> Result<Vec<HistBin>, RiskError> {
    let (lo, hi) = range;
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(RiskError::InvalidInput(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(RiskError::InvalidInput(format!(
            "bad histogram range [{lo}, {hi}]"
        )));
    }
    if sample.is_empty() {
        return Err(RiskError::EmptySample("histogram of nothing".to_string()));
    }
    let n_bins = ((hi - lo) / bin_width).ceil() as usize;
    let mut counts = vec![0usize; n_bins];
    for &v in sample.ratios() {
        if v < lo || v > hi {
            continue;
        }
        let idx = (((v - lo) / bin_width).floor() as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let norm = sample.len() as f64 * bin_width;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistBin {
            lo: lo + i as f64 * bin_width,
            hi: lo + (i + 1) as f64 * bin_width,
            count,
            density: count as f64 / norm,
        })
        .collect())
}

/// How to divide a sample into small and large firms by size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRule {
    /// Split at the sample median of the sizes (interpolated for even n);
    /// firms exactly at the median go to the small side.
    Median,
    /// Small means size strictly below the given value.
    Threshold(f64),
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub small: RatioSample,
    pub large: RatioSample,
    /// Set when one side ended up empty, which usually means the sizes are
    /// too concentrated for the rule to separate anything.
    pub warning: Option<String>,
}

/// Partitions a sample by firm size. Requires sizes; every ratio lands in
/// exactly one side and order within each side is preserved.
pub fn split_by_size(sample: &RatioSample, rule: SplitRule) -> Result<SplitOutcome, RiskError> {
    let sizes = sample.sizes().ok_or(RiskError::MissingSizes)?;
    if sample.is_empty() {
        return Err(RiskError::EmptySample("cannot split nothing".to_string()));
    }
    let cutoff = match rule {
        SplitRule::Median => {
            let mut sorted = sizes.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("sizes are finite"));
            let n = sorted.len();
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
        SplitRule::Threshold(v) => {
            if !v.is_finite() || v <= 0.0 {
                return Err(RiskError::InvalidInput(format!(
                    "size threshold must be positive, got {v}"
                )));
            }
            v
        }
    };
    let goes_small = |size: f64| match rule {
        SplitRule::Median => size <= cutoff,
        SplitRule::Threshold(_) => size < cutoff,
    };
    let mut small = (Vec::new(), Vec::new());
    let mut large = (Vec::new(), Vec::new());
    for (&ratio, &size) in sample.ratios().iter().zip(sizes) {
        let side = if goes_small(size) { &mut small } else { &mut large };
        side.0.push(ratio);
        side.1.push(size);
    }
    let warning = if small.0.is_empty() {
        Some(format!("no firms below the size cutoff {cutoff}"))
    } else if large.0.is_empty() {
        Some(format!("no firms above the size cutoff {cutoff}"))
    } else {
        None
    };
    let rebuild = |(ratios, sizes): (Vec<f64>, Vec<f64>)| -> Result<RatioSample, RiskError> {
        let mut s = RatioSample::new(ratios, sample.source())?.with_sizes(sizes)?;
        if let Some((lo, hi)) = sample.period() {
            s = s.with_period(lo, hi);
        }
        Ok(s)
    };
    Ok(SplitOutcome {
        small: rebuild(small)?,
        large: rebuild(large)?,
        warning,
    })
}

/// Conditional bankruptcy probability as a power law in the ratio:
/// P(B | R = r) = prefactor * p_b * r^exponent, valid on [r_lo, r_hi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimate {
    /// Ratio of the two density prefactors (bankrupt over existing).
    pub prefactor: f64,
    /// Difference of the inverse rank exponents, 1/zeta_existing - 1/zeta_bankrupt.
    pub exponent: f64,
    /// Unconditional bankruptcy probability supplied by the caller.
    pub p_b: f64,
    pub r_lo: f64,
    pub r_hi: f64,
}

impl BayesEstimate {
    /// Probability at ratio `r` (must be positive), clamped into [0, 1].
    /// The flag reports whether clamping changed the raw value.
    pub fn evaluate(&self, r: f64) -> (f64, bool) {
        let raw = self.prefactor * self.p_b * r.powf(self.exponent);
        let clamped = raw.clamp(0.0, 1.0);
        (clamped, clamped != raw)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi
    }
}

/// Composes the ratio tail fits of the bankrupt and existing populations
/// with an unconditional bankruptcy probability `p_b` into a conditional
/// probability curve via Bayes' rule on the two densities.
///
/// The density prefactors are only comparable when both fits were produced
/// by the same method; pdf fits bin on one absolute log grid, so equal
/// methods imply equal binning. The validity range is the intersection of
/// the two fits' value ranges unless an explicit `range` overrides it;
/// rank-space fits carry no ratio range, so they require the override.
pub fn bayes_compose(
    fit_bankrupt: &PowerLawFit,
    fit_existing: &PowerLawFit,
    prefactor_bankrupt: f64,
    prefactor_existing: f64,
    p_b: f64,
    range: Option<(f64, f64)>,
) -> Result<BayesEstimate, RiskError> {
    if !(0.0..=1.0).contains(&p_b) {
        return Err(RiskError::InvalidInput(format!(
            "p_b must be a probability, got {p_b}"
        )));
    }
    for (name, pf) in [
        ("bankrupt", prefactor_bankrupt),
        ("existing", prefactor_existing),
    ] {
        if !pf.is_finite() || pf <= 0.0 {
            return Err(RiskError::InvalidInput(format!(
                "{name} prefactor must be positive, got {pf}"
            )));
        }
    }
    if fit_bankrupt.method != fit_existing.method {
        return Err(RiskError::FitMismatch(format!(
            "prefactors from {} and {} fits are not comparable",
            fit_bankrupt.method, fit_existing.method
        )));
    }
    let (r_lo, r_hi) = match range {
        Some((lo, hi)) => {
            if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || lo >= hi {
                return Err(RiskError::InvalidInput(format!(
                    "bad ratio range [{lo}, {hi}]"
                )));
            }
            (lo, hi)
        }
        None => {
            if fit_bankrupt.method.uses_rank_range() {
                return Err(RiskError::FitMismatch(
                    "rank-space fits carry no ratio range; pass one explicitly".to_string(),
                ));
            }
            let lo = fit_bankrupt.range_lo.max(fit_existing.range_lo);
            let hi = fit_bankrupt.range_hi.min(fit_existing.range_hi);
            if lo >= hi {
                return Err(RiskError::FitMismatch(format!(
                    "fit ranges [{}, {}] and [{}, {}] do not overlap",
                    fit_bankrupt.range_lo,
                    fit_bankrupt.range_hi,
                    fit_existing.range_lo,
                    fit_existing.range_hi
                )));
            }
            (lo, hi)
        }
    };
    Ok(BayesEstimate {
        prefactor: prefactor_bankrupt / prefactor_existing,
        exponent: fit_existing.zeta_prime - fit_bankrupt.zeta_prime,
        p_b,
        r_lo,
        r_hi,
    })
}

/// Restricts a dataset to records with `year` in the closed interval
/// [`lo`, `hi`]. An empty result is fine; asking for a backwards interval
/// is not.
pub fn period_slice(ds: &Dataset, lo: i32, hi: i32) -> Result<Dataset, RiskError> {
    if lo > hi {
        return Err(RiskError::InvalidInput(format!(
            "backwards year interval [{lo}, {hi}]"
        )));
    }
    Ok(Dataset {
        records: ds
            .records
            .iter()
            .filter(|r| (lo..=hi).contains(&r.year))
            .cloned()
            .collect(),
        provenance: ds.provenance.clone(),
    })
}
