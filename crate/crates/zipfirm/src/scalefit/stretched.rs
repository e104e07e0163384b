//! Stretched-exponential rank model, v(r) = scale * exp(-r^beta / tau).
//!
//! Linear in log space once beta is fixed: ln v = ln scale - r^beta / tau.
//! beta is scanned over a fixed grid and the (beta, tau, scale) triple with
//! the smallest log-space SSR wins; ties go to the smaller beta.

use serde::{Deserialize, Serialize};

use super::ols::fit_line;
use super::{FitError, RankSeries};

/// beta grid: 0.10 to 1.50 in steps of 0.01.
const BETA_GRID_CENTS: std::ops::RangeInclusive<u32> = 10..=150;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchedExpFit {
    pub beta: f64,
    pub tau: f64,
    pub scale: f64,
    /// Squared residual of ln v against the fitted model.
    pub ssr: f64,
}

impl StretchedExpFit {
    pub fn model_value(&self, rank: usize) -> f64 {
        assert!(rank >= 1, "ranks are 1-based");
        self.scale * (-(rank as f64).powf(self.beta) / self.tau).exp()
    }
}

pub fn fit_stretched_exponential(series: &RankSeries) -> Result<StretchedExpFit, FitError> {
    let n = series.len();
    if n < 10 {
        return Err(FitError::InsufficientData { needed: 10, got: n });
    }
    let log_vals: Vec<f64> = (1..=n).map(|r| series.value_at_rank(r).ln()).collect();

    let mut best: Option<StretchedExpFit> = None;
    for cents in BETA_GRID_CENTS {
        let beta = cents as f64 / 100.0;
        let xs: Vec<f64> = (1..=n).map(|r| (r as f64).powf(beta)).collect();
        let Ok(line) = fit_line(&xs, &log_vals) else {
            continue;
        };
        if line.slope >= 0.0 {
            continue; // tau would be non-positive; not a decay
        }
        let candidate = StretchedExpFit {
            beta,
            tau: -1.0 / line.slope,
            scale: line.intercept.exp(),
            ssr: line.ssr,
        };
        // strict < keeps the earlier (smaller) beta on ties
        if best.as_ref().is_none_or(|b| candidate.ssr < b.ssr) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| {
        FitError::Degenerate("no beta on the grid yields a decaying fit".to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalefit::build_rank_series;

    fn stretched_series(n: usize, beta: f64, tau: f64, scale: f64) -> RankSeries {
        let vals: Vec<f64> = (1..=n)
            .map(|r| scale * (-(r as f64).powf(beta) / tau).exp())
            .collect();
        build_rank_series(&vals).unwrap().0
    }

    #[test]
    fn exact_parameters_recovered() {
        let series = stretched_series(500, 0.5, 45.0, 10.0);
        let fit = fit_stretched_exponential(&series).unwrap();
        assert_eq!(fit.beta, 0.5);
        assert!((fit.tau - 45.0).abs() < 1e-6, "tau = {}", fit.tau);
        assert!((fit.scale - 10.0).abs() < 1e-6, "scale = {}", fit.scale);
        assert!(fit.ssr < 1e-18);
    }

    #[test]
    fn plain_exponential_is_the_beta_one_point() {
        let series = stretched_series(200, 1.0, 10.0, 2.0);
        let fit = fit_stretched_exponential(&series).unwrap();
        assert_eq!(fit.beta, 1.0);
        assert!((fit.tau - 10.0).abs() < 1e-6);
    }

    #[test]
    fn power_law_data_fits_badly() {
        // a pure power law has log-log curvature no r^beta regressor matches,
        // so the residual stays far from the exact-fit scale
        let vals: Vec<f64> = (1..=300).map(|r| (r as f64).powf(-1.0)).collect();
        let series = build_rank_series(&vals).unwrap().0;
        let fit = fit_stretched_exponential(&series).unwrap();
        assert!(fit.ssr > 1e-3, "ssr = {}", fit.ssr);
    }

    #[test]
    fn model_value_round_trips() {
        let series = stretched_series(100, 0.73, 20.0, 5.0);
        let fit = fit_stretched_exponential(&series).unwrap();
        for r in [1usize, 50, 100] {
            let expected = series.value_at_rank(r);
            let got = fit.model_value(r);
            assert!(
                (got / expected - 1.0).abs() < 1e-9,
                "rank {r}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let vals = [5.0, 4.0, 3.0, 2.0, 1.0];
        let series = build_rank_series(&vals).unwrap().0;
        assert!(matches!(
            fit_stretched_exponential(&series),
            Err(FitError::InsufficientData { needed: 10, got: 5 })
        ));
    }
}
