use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Budget, bounds and constraints of the cavity structure search.
///
/// Vectors are ordered `(l1, f1, l2, f2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub n_itr: u32,
    pub n_smax: u64,
    pub v_lbound_m: [f64; 4],
    pub v_ubound_m: [f64; 4],
    pub alpha_sc: f64,
    pub d_set_m: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub a_l1_bound_m: f64,
    pub a_l2_bound_m: f64,
    pub seed: u64,
    /// Redraws of an iteration that ends without any feasible incumbent.
    pub max_empty_attempts: u32,
}

/// Monte Carlo budget of the full-scale runs.
pub const FULL_BUDGET_SAMPLES: u64 = 1_000_000;

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_itr: 30,
            n_smax: 100_000,
            v_lbound_m: [0.0; 4],
            v_ubound_m: [0.06; 4],
            alpha_sc: 0.7,
            d_set_m: 6.0,
            d_min_m: 0.0,
            d_max_m: 6.0,
            a_l1_bound_m: 3e-3,
            a_l2_bound_m: 3e-3,
            seed: 0,
            max_empty_attempts: 50,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_itr == 0 {
            return Err(Error::invalid("n_itr", "must be >= 1"));
        }
        if self.n_smax == 0 {
            return Err(Error::invalid("n_smax", "must be >= 1"));
        }
        for k in 0..4 {
            let (lo, hi) = (self.v_lbound_m[k], self.v_ubound_m[k]);
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
                return Err(Error::invalid(
                    "v_bounds_m",
                    format!("element {k}: need 0 <= lower < upper, got [{lo}, {hi}]"),
                ));
            }
        }
        if !(self.alpha_sc > 0.0 && self.alpha_sc < 1.0) {
            return Err(Error::invalid(
                "alpha_sc",
                format!("must lie in (0, 1), got {}", self.alpha_sc),
            ));
        }
        if !(self.d_min_m >= 0.0 && self.d_min_m <= self.d_set_m && self.d_set_m <= self.d_max_m)
            || !self.d_max_m.is_finite()
        {
            return Err(Error::invalid(
                "d_set_m",
                format!(
                    "need 0 <= d_min <= d_set <= d_max, got {} <= {} <= {}",
                    self.d_min_m, self.d_set_m, self.d_max_m
                ),
            ));
        }
        if !(self.a_l1_bound_m >= 0.0) || !(self.a_l2_bound_m >= 0.0) {
            return Err(Error::invalid("a_bound_m", "must be >= 0"));
        }
        Ok(())
    }
}
