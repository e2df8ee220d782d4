use crate::error::{Error, Result};
use crate::stats;

use super::sensitivity::{apply_control_variate, pilot_count, sens_terms, SensTerms};
use super::EstimatorOutput;

/// Terms of the marginal-density estimator of f_{Xᵢ}(s) for each sample,
/// after shifting coordinate i and s by `shift_a`:
/// f1 = (1/s̃)·1{x̃ᵢ ≤ s̃}·(x̃ᵢ ∂ᵢlog f + 1), s̃ = s + a, x̃ᵢ = xᵢ + a.
///
/// `coord` holds the i-th coordinate of each sample and `coord_score` the
/// matching component of ∇log f; an unnormalized density gives the same score.
pub fn marginal_sens_terms(
    coord: &[f64],
    coord_score: &[f64],
    s: f64,
    shift_a: f64,
) -> Result<Vec<SensTerms>> {
    let shifted = s + shift_a;
    if shifted == 0.0 {
        return Err(Error::Domain(format!(
            "evaluation point {s} maps to 0 under shift {shift_a}; choose a different shift"
        )));
    }
    coord
        .iter()
        .zip(coord_score)
        .map(|(&x, &g)| sens_terms(&[x + shift_a], &[g], shifted, 1))
        .collect()
}

/// Marginal density estimates of coordinate `i` over `s_grid`, with a control
/// variate fitted per grid point on the first ⌈pilot_frac·m⌉ samples. Standard
/// errors assume independent samples.
pub fn marginal_sens(
    samples: &[Vec<f64>],
    scores: &[Vec<f64>],
    i: usize,
    s_grid: &[f64],
    shift_a: f64,
    pilot_frac: f64,
) -> Result<Vec<EstimatorOutput>> {
    if samples.len() != scores.len() {
        return Err(Error::InvalidParameter(
            "one score vector per sample is required".into(),
        ));
    }
    if samples.iter().chain(scores).any(|v| v.len() <= i) {
        return Err(Error::Domain(format!("coordinate {i} out of range")));
    }
    let coord: Vec<f64> = samples.iter().map(|x| x[i]).collect();
    let coord_score: Vec<f64> = scores.iter().map(|g| g[i]).collect();
    let pilot = pilot_count(coord.len(), pilot_frac);
    s_grid
        .iter()
        .map(|&s| {
            let terms = marginal_sens_terms(&coord, &coord_score, s, shift_a)?;
            let (values, _) = apply_control_variate(&terms, pilot)?;
            Ok(EstimatorOutput {
                estimate: stats::mean(&values),
                std_error: stats::std_error(&values),
                r_used: values.len(),
                cpu_seconds: 0.0,
            })
        })
        .collect()
}
