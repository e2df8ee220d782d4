use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::joint::JointModel;
use crate::replicates::Replicates;
use crate::stats;

use super::EstimatorOutput;

/// Per-replicate terms of the likelihood-ratio pair at one point s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensTerms {
    /// (1/s)·1{𝟏·x ≤ s}·(x·∇log f(x) + n)
    pub f1: f64,
    /// −(1/s)·1{𝟏·x > s}·(x·∇log f(x) + n)
    pub f2: f64,
    /// f1 − f2, a zero-mean control variate.
    pub d: f64,
}

fn terms_from(sum: f64, weight: f64, s: f64) -> SensTerms {
    let d = weight / s;
    if sum <= s {
        SensTerms { f1: d, f2: 0.0, d }
    } else {
        SensTerms { f1: 0.0, f2: -d, d }
    }
}

pub fn sens_terms(x: &[f64], score_x: &[f64], s: f64, n: usize) -> Result<SensTerms> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Domain(format!(
            "the sensitivity estimator needs s ≠ 0 (got {s}); shift the summands instead"
        )));
    }
    let weight: f64 = x.iter().zip(score_x).map(|(a, b)| a * b).sum::<f64>() + n as f64;
    Ok(terms_from(x.iter().sum(), weight, s))
}

/// β = Cov(f1, d)/Var(d) on the pilot; 0 when undetermined.
pub fn cv_coefficient(pilot: &[SensTerms]) -> f64 {
    if pilot.len() < 2 {
        return 0.0;
    }
    let f1: Vec<f64> = pilot.iter().map(|t| t.f1).collect();
    let d: Vec<f64> = pilot.iter().map(|t| t.d).collect();
    let var = stats::variance(&d);
    if var <= 0.0 || !var.is_finite() {
        return 0.0;
    }
    stats::covariance(&f1, &d) / var
}

/// ⌈frac·r⌉
pub fn pilot_count(r: usize, frac: f64) -> usize {
    (frac * r as f64).ceil() as usize
}

/// Fits β on the first `pilot` terms and returns f1 − βd over the rest.
pub fn apply_control_variate(terms: &[SensTerms], pilot: usize) -> Result<(Vec<f64>, f64)> {
    if pilot >= terms.len() {
        return Err(Error::Domain(format!(
            "{} replicates leave nothing to average after a pilot of {pilot}",
            terms.len()
        )));
    }
    let beta = cv_coefficient(&terms[..pilot]);
    let values = terms[pilot..].iter().map(|t| t.f1 - beta * t.d).collect();
    Ok((values, beta))
}

fn check_pilot_frac(frac: f64) -> Result<()> {
    if (0.0..1.0).contains(&frac) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "pilot fraction must lie in [0, 1), got {frac}"
        )))
    }
}

/// Per-replicate sums 𝟏·x and weights x·∇log f(x) + n. The score is
/// evaluated once per replicate and reused at every s.
#[derive(Debug, Clone)]
pub struct SensitivityInputs {
    sums: Vec<f64>,
    weights: Vec<f64>,
}

impl SensitivityInputs {
    pub fn new(reps: &Replicates, jm: &JointModel) -> Result<Self> {
        let n = jm.dim();
        let pairs: Vec<Result<(f64, f64)>> = (0..reps.len())
            .into_par_iter()
            .map(|r| {
                let x = reps.row(r);
                let mut g = vec![0.0; n];
                jm.score_into(x, &mut g)
                    .map_err(|e| Error::Domain(format!("replicate {r}: {e}")))?;
                let weight = x.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() + n as f64;
                Ok((x.iter().sum(), weight))
            })
            .collect();
        let mut sums = Vec::with_capacity(pairs.len());
        let mut weights = Vec::with_capacity(pairs.len());
        for p in pairs {
            let (s, w) = p?;
            sums.push(s);
            weights.push(w);
        }
        Ok(Self { sums, weights })
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn terms(&self, s: f64) -> Result<Vec<SensTerms>> {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Domain(format!(
                "the sensitivity estimator needs s ≠ 0 (got {s}); shift the summands instead"
            )));
        }
        Ok(self
            .sums
            .iter()
            .zip(&self.weights)
            .map(|(&sum, &w)| terms_from(sum, w, s))
            .collect())
    }

    pub fn estimate(&self, s: f64, pilot_frac: f64) -> Result<SensitivityEstimate> {
        check_pilot_frac(pilot_frac)?;
        let terms = self.terms(s)?;
        let pilot = pilot_count(terms.len(), pilot_frac);
        let (values, beta) = apply_control_variate(&terms, pilot)?;
        Ok(SensitivityEstimate {
            s,
            output: EstimatorOutput::from_values(&values, 0.0),
            beta,
            pilot,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEstimate {
    pub s: f64,
    pub output: EstimatorOutput,
    pub beta: f64,
    pub pilot: usize,
}

/// Control-variate sensitivity estimate of f_S(s). The pilot (first
/// ⌈pilot_frac·R⌉ replicates) only fits β and is excluded from the average.
pub fn estimate_sensitivity(
    reps: &Replicates,
    jm: &JointModel,
    s: f64,
    pilot_frac: f64,
) -> Result<EstimatorOutput> {
    Ok(sensitivity_curve(reps, jm, &[s], pilot_frac)?[0].output)
}

/// Sensitivity estimates over a grid, with β fitted separately at each point.
pub fn sensitivity_curve(
    reps: &Replicates,
    jm: &JointModel,
    grid: &[f64],
    pilot_frac: f64,
) -> Result<Vec<SensitivityEstimate>> {
    check_pilot_frac(pilot_frac)?;
    let start = Instant::now();
    let inputs = SensitivityInputs::new(reps, jm)?;
    let mut out = grid
        .iter()
        .map(|&s| inputs.estimate(s, pilot_frac))
        .collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    for e in &mut out {
        e.output.cpu_seconds = elapsed;
    }
    Ok(out)
}
