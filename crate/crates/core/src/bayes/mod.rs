//! Posterior marginal densities from MCMC output: a Bayesian logistic
//! regression target, a random-walk Metropolis sampler, the score-based
//! marginal estimator and a kernel density baseline.

mod kde;
mod mcmc;
mod model;
mod study;

pub use kde::{kde, silverman_bandwidth};
pub use mcmc::{rw_metropolis, Chain, LogTarget, StandardNormalTarget, UnnormalizedDensity};
pub use model::{load_pima, LogisticModel, PIMA_OUTCOME, PIMA_PREDICTORS, PIMA_SELECTED};
pub use study::{run_pima_study, PimaStudy, PimaStudyConfig};

use crate::error::{Error, Result};
use crate::estimators::{apply_control_variate, marginal_sens_terms, pilot_count};
use crate::stats;

/// Batches used for MCMC standard errors.
pub const BATCHES: usize = 25;

/// A marginal density estimate with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalPoint {
    pub s: f64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Shift moving every grid point to at least 0.5, away from the 1/s pole.
pub fn default_shift(grid: &[f64]) -> f64 {
    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    (0.5 - min).max(0.0)
}

/// Score-based estimate of the marginal density of `coordinate` along `grid`.
/// The first ⌈pilot_frac·m⌉ states fit the control variate; the rest are
/// averaged, with batch-means standard errors since the states are correlated.
pub fn marginal_posterior_density(
    chain: &Chain,
    coordinate: usize,
    grid: &[f64],
    shift_a: Option<f64>,
    pilot_frac: f64,
) -> Result<Vec<MarginalPoint>> {
    if chain.is_empty() {
        return Err(Error::Domain("chain is empty".into()));
    }
    if coordinate >= chain.dim() {
        return Err(Error::Domain(format!(
            "coordinate {coordinate} out of range"
        )));
    }
    let shift = shift_a.unwrap_or_else(|| default_shift(grid));
    let coord = chain.coordinate(coordinate);
    let score = chain.coordinate_scores(coordinate);
    let pilot = pilot_count(coord.len(), pilot_frac);
    grid.iter()
        .map(|&s| {
            let terms = marginal_sens_terms(&coord, &score, s, shift)?;
            let (values, _) = apply_control_variate(&terms, pilot)?;
            Ok(MarginalPoint {
                s,
                estimate: stats::mean(&values),
                std_error: stats::batch_means_se(&values, BATCHES),
            })
        })
        .collect()
}
