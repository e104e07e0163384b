use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::SimError;

/// How the per-step bankruptcy hazard is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardMode {
    /// One draw per step against the summed hazard q * sum_j R_j^e, then one
    /// firm selected proportionally to R_j^e. O(log N) per step; at most one
    /// failure per step. Indistinguishable from the sweep when the summed
    /// hazard is small, which is where the model is run.
    #[default]
    Aggregated,
    /// One draw per alive firm per step, ascending firm index. The reference
    /// reading of "fails with probability q * R^e"; O(N) per step.
    PerFirmSweep,
}

impl HazardMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HazardMode::Aggregated => "aggregated",
            HazardMode::PerFirmSweep => "per_firm_sweep",
        }
    }
}

impl fmt::Display for HazardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HazardMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "aggregated" => Ok(HazardMode::Aggregated),
            "per_firm_sweep" => Ok(HazardMode::PerFirmSweep),
            other => Err(SimError::InvalidConfig(format!(
                "unknown hazard mode {other:?} (expected aggregated or per_firm_sweep)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Probability that an arriving asset unit founds a new firm instead of
    /// joining an existing one. The asset Zipf slope tends to 1 - p.
    pub p: f64,
    /// Debt assigned at founding and per absorbed asset unit, in (0, 1).
    pub m: f64,
    /// Bankruptcy rate scale; hazard is q * R^hazard_exponent.
    pub q: f64,
    pub hazard_exponent: f64,
    /// Per-step probability of one merger between two uniformly chosen firms.
    pub p_merge: f64,
    /// Entry growth: arrivals per step accumulate as t^theta. 0 = one unit
    /// per step.
    pub theta: f64,
    pub steps: u64,
    pub seed: u64,
    pub hazard_mode: HazardMode,
    /// Default false: a merger transfers the target's debt to the acquirer.
    /// True drops the target's debt instead.
    pub merger_drops_debt: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            p: 0.01,
            m: 0.5,
            q: 0.0,
            hazard_exponent: 0.95,
            p_merge: 0.0,
            theta: 0.0,
            steps: 500_000,
            seed: 0,
            hazard_mode: HazardMode::default(),
            merger_drops_debt: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.p > 0.0 && self.p <= 1.0) {
            return fail(format!("p must be in (0, 1], got {}", self.p));
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return fail(format!("m must be in (0, 1), got {}", self.m));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return fail(format!("q must be finite and non-negative, got {}", self.q));
        }
        if !(self.hazard_exponent > 0.0 && self.hazard_exponent.is_finite()) {
            return fail(format!(
                "hazard_exponent must be finite and positive, got {}",
                self.hazard_exponent
            ));
        }
        if !(self.p_merge >= 0.0 && self.p_merge <= 1.0) {
            return fail(format!("p_merge must be in [0, 1], got {}", self.p_merge));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return fail(format!(
                "theta must be finite and non-negative, got {}",
                self.theta
            ));
        }
        if self.steps == 0 {
            return fail("steps must be positive".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn boundary_values() {
        let mut c = SimConfig {
            p: 1.0,
            ..SimConfig::default()
        };
        c.validate().unwrap();
        c.p = 0.0;
        assert!(c.validate().is_err());
        c.p = 0.01;
        c.m = 1.0;
        assert!(c.validate().is_err());
        c.m = 0.5;
        c.q = -1e-9;
        assert!(c.validate().is_err());
        c.q = 0.0;
        c.p_merge = 1.5;
        assert!(c.validate().is_err());
        c.p_merge = 0.0;
        c.theta = f64::NAN;
        assert!(c.validate().is_err());
        c.theta = 0.0;
        c.steps = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hazard_mode_round_trip() {
        assert_eq!(
            "aggregated".parse::<HazardMode>().unwrap(),
            HazardMode::Aggregated
        );
        assert_eq!(
            "per_firm_sweep".parse::<HazardMode>().unwrap(),
            HazardMode::PerFirmSweep
        );
        assert!("both".parse::<HazardMode>().is_err());
        assert_eq!(HazardMode::Aggregated.to_string(), "aggregated");
    }
}
