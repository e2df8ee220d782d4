//! Density estimators for S = 𝟏·X and for posterior marginals.
//!
//! All estimators consume a shared [`Replicates`](crate::Replicates) set so
//! that comparisons run on common random numbers.

mod conditional;
mod marginal;
mod sensitivity;

pub use conditional::{
    conditional_curve, conditional_values, estimate_ak, estimate_cond, estimate_ext_cond,
    ConditionalKind,
};
pub use marginal::{marginal_sens, marginal_sens_terms};
pub use sensitivity::{
    apply_control_variate, cv_coefficient, estimate_sensitivity, pilot_count, sens_terms,
    sensitivity_curve, SensTerms, SensitivityEstimate, SensitivityInputs,
};

use crate::stats;

/// Summary of one estimator at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOutput {
    pub estimate: f64,
    pub std_error: f64,
    /// Replicates averaged into `estimate` (pilot replicates excluded).
    pub r_used: usize,
    /// Wall time of the pass that produced this value (whole grid when the
    /// pass covered a grid).
    pub cpu_seconds: f64,
}

impl EstimatorOutput {
    pub fn from_values(values: &[f64], cpu_seconds: f64) -> Self {
        Self {
            estimate: stats::mean(values),
            std_error: stats::std_error(values),
            r_used: values.len(),
            cpu_seconds,
        }
    }

    /// Per-replicate variance implied by the standard error.
    pub fn variance(&self) -> f64 {
        self.std_error * self.std_error * self.r_used as f64
    }
}
