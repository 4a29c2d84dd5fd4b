use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-unit prices of the five cost terms: sequential page reads, random
/// page reads, tuples processed, index entries processed and operator
/// evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModelParams {
    pub c_s: f64,
    pub c_r: f64,
    pub c_t: f64,
    pub c_i: f64,
    pub c_o: f64,
}

impl Default for CostModelParams {
    fn default() -> Self {
        CostModelParams {
            c_s: 1.0,
            c_r: 4.0,
            c_t: 0.01,
            c_i: 0.005,
            c_o: 0.0025,
        }
    }
}

impl CostModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c_s, self.c_r, self.c_t, self.c_i, self.c_o];
        if all.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Config(format!(
                "cost constants must be finite and non-negative, got {all:?}"
            )));
        }
        Ok(())
    }
}

/// Unit counts for the five cost terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CardinalityProfile {
    pub n_s: f64,
    pub n_r: f64,
    pub n_t: f64,
    pub n_i: f64,
    pub n_o: f64,
}

impl CardinalityProfile {
    pub fn scaled(&self, factor: f64) -> Self {
        CardinalityProfile {
            n_s: self.n_s * factor,
            n_r: self.n_r * factor,
            n_t: self.n_t * factor,
            n_i: self.n_i * factor,
            n_o: self.n_o * factor,
        }
    }
}

/// `n_s·c_s + n_r·c_r + n_t·c_t + n_i·c_i + n_o·c_o`.
pub fn optimizer_cost(params: &CostModelParams, profile: &CardinalityProfile) -> f64 {
    profile.n_s * params.c_s
        + profile.n_r * params.c_r
        + profile.n_t * params.c_t
        + profile.n_i * params.c_i
        + profile.n_o * params.c_o
}
