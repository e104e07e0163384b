//! Mann-Whitney U test with midranks, tie-corrected variance and continuity
//! correction. Normal approximation throughout; the sample sizes this crate
//! meets are deep in the asymptotic regime, and exact enumeration appears
//! only as a test oracle for tiny inputs.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::RiskError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    /// U of sample 1: pairs where the sample-1 value exceeds the sample-2
    /// value, plus half the tied pairs.
    pub u_statistic: f64,
    /// Signed standard score. Negative when sample 1 holds the larger values,
    /// i.e. occupies the low (leading) Zipf ranks; positive when sample 1 is
    /// the smaller-valued one.
    pub z_value: f64,
    pub p_value_two_sided: f64,
    pub n1: usize,
    pub n2: usize,
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult, RiskError> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(RiskError::InvalidInput(
            "both samples must be non-empty".to_string(),
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(RiskError::InvalidInput("samples contain NaN".to_string()));
    }

    // pool, sort ascending, assign midranks to runs of equal values
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("no NaN after the guard"));

    let n = pooled.len();
    let mut rank_sum_1 = 0.0f64;
    let mut tie_term = 0.0f64; // sum of t^3 - t over tie groups
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        let midrank = (i + 1 + j) as f64 / 2.0; // average of ranks i+1..=j
        rank_sum_1 += midrank * pooled[i..j].iter().filter(|(_, is_a)| *is_a).count() as f64;
        tie_term += t * t * t - t;
        i = j;
    }

    let n1f = n1 as f64;
    let n2f = n2 as f64;
    let nf = n as f64;
    let u1 = rank_sum_1 - n1f * (n1f + 1.0) / 2.0;
    let u2 = n1f * n2f - u1;
    let mean = n1f * n2f / 2.0;
    let variance = (n1f * n2f / 12.0) * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));

    let (z_value, p_value_two_sided) = if variance <= 0.0 {
        // every pooled value identical: no evidence either way
        (0.0, 1.0)
    } else {
        let d = u2 - mean;
        let corrected = d.signum() * (d.abs() - 0.5).max(0.0);
        let z = corrected / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let p = (2.0 * (1.0 - normal.cdf(z.abs()))).clamp(0.0, 1.0);
        (z, p)
    };

    Ok(UTestResult {
        u_statistic: u1,
        z_value,
        p_value_two_sided,
        n1,
        n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct pair-counting definition of U1.
    fn u1_by_pairs(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for &x in a {
            for &y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    #[test]
    fn identical_samples_are_uninformative() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.z_value, 0.0);
        assert_eq!(r.p_value_two_sided, 1.0);
    }

    #[test]
    fn all_constant_is_z_zero_not_an_error() {
        let r = mann_whitney_u(&[5.0; 4], &[5.0; 7]).unwrap();
        assert_eq!(r.z_value, 0.0);
        assert_eq!(r.p_value_two_sided, 1.0);
    }

    #[test]
    fn separated_samples_match_enumeration() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        // exact null: 6 equally likely labelings of 4 distinct values into
        // groups of 2; only one gives U1 = 0, so one-sided p = 1/6
        let values = [1.0, 2.0, 3.0, 4.0];
        let mut at_most = 0;
        let mut total = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = [values[i], values[j]];
                let b: Vec<f64> = (0..4)
                    .filter(|&k| k != i && k != j)
                    .map(|k| values[k])
                    .collect();
                if u1_by_pairs(&a, &b) <= r.u_statistic {
                    at_most += 1;
                }
                total += 1;
            }
        }
        assert_eq!(total, 6);
        assert_eq!(at_most, 1);
        // sample 1 is the smaller-valued one, so z is positive
        assert!(r.z_value > 0.0, "z = {}", r.z_value);
    }

    #[test]
    fn sign_convention_follows_which_sample_is_larger() {
        let small: Vec<f64> = (1..=40).map(f64::from).collect();
        let large: Vec<f64> = (30..=70).map(f64::from).collect();
        let r = mann_whitney_u(&large, &small).unwrap();
        assert!(r.z_value < 0.0, "sample 1 larger must give negative z");
        assert!(r.p_value_two_sided < 0.01);
    }

    #[test]
    fn empty_and_nan_inputs_error() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    proptest! {
        // midrank formula equals the direct pair count, ties included
        #[test]
        fn u_matches_pair_counting(
            a in proptest::collection::vec(0u8..10, 1..25),
            b in proptest::collection::vec(0u8..10, 1..25),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let r = mann_whitney_u(&a, &b).unwrap();
            prop_assert_eq!(r.u_statistic, u1_by_pairs(&a, &b));
        }

        // swapping the samples negates z and keeps p
        #[test]
        fn swap_antisymmetry(
            a in proptest::collection::vec(0u8..12, 1..30),
            b in proptest::collection::vec(0u8..12, 1..30),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let fwd = mann_whitney_u(&a, &b).unwrap();
            let rev = mann_whitney_u(&b, &a).unwrap();
            prop_assert_eq!(fwd.z_value, -rev.z_value);
            prop_assert_eq!(fwd.p_value_two_sided, rev.p_value_two_sided);
            prop_assert_eq!(fwd.u_statistic + rev.u_statistic,
                            (a.len() * b.len()) as f64);
        }
    }
}
