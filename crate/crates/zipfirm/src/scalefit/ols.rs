//! Shared least-squares line fit. Two-pass centered computation so residual
//! sums stay accurate even when the fit is numerically exact.

use super::FitError;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub ssr: f64,
    pub slope_se: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Line, FitError> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 3 {
        return Err(FitError::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // sxx stays marginally above zero for constant regressors (the mean
    // itself rounds), so the exact all-equal test is the reliable guard.
    if sxx == 0.0 || xs.iter().all(|&x| x == xs[0]) {
        return Err(FitError::Degenerate(
            "regressor has zero variance".to_string(),
        ));
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ssr = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = (y - y_mean) - slope * (x - x_mean);
        ssr += r * r;
    }
    let slope_se = (ssr / ((nf - 2.0) * sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };

    Ok(Line {
        slope,
        intercept,
        ssr,
        slope_se,
        r_squared,
        n,
    })
}
