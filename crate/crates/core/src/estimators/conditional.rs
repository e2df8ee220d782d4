use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::joint::{ext_conditional, leave_one_out, Dependence, JointModel};
use crate::replicates::Replicates;

use super::EstimatorOutput;

/// Conditional-density estimators of f_S(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionalKind {
    /// (1/n) Σᵢ f_{Xᵢ|X₋ᵢ}(s − S₋ᵢ)
    Cond,
    /// (1/n) Σᵢ f_{Xᵢ|X₋ᵢ,Z}(s − S₋ᵢ)
    ExtCond,
    /// Σᵢ f_{Xᵢ|X₋ᵢ}(s − S₋ᵢ)·1{M₋ᵢ + S₋ᵢ ≤ s}
    Ak,
    /// Σᵢ f_{Xᵢ|X₋ᵢ,Z}(s − S₋ᵢ)·1{M₋ᵢ + S₋ᵢ ≤ s}
    AkExt,
}

impl ConditionalKind {
    pub fn is_extended(self) -> bool {
        matches!(self, ConditionalKind::ExtCond | ConditionalKind::AkExt)
    }

    fn is_ak(self) -> bool {
        matches!(self, ConditionalKind::Ak | ConditionalKind::AkExt)
    }
}

fn check_capability(reps: &Replicates, jm: &JointModel, kind: ConditionalKind) -> Result<()> {
    if reps.dim() != jm.dim() {
        return Err(Error::InvalidParameter(format!(
            "replicates have dimension {} but the model has {}",
            reps.dim(),
            jm.dim()
        )));
    }
    if kind.is_extended() {
        if !jm.supports_extended() {
            return Err(Error::Capability(
                "frailty-extended estimators need a Clayton or Gumbel–Hougaard copula".into(),
            ));
        }
        if !reps.has_frailty() {
            return Err(Error::Capability(
                "replicates were simulated without frailties".into(),
            ));
        }
    } else if !jm.supports_conditional() {
        return Err(Error::Capability(
            "conditional densities are not available for this copula; use the sequential estimator"
                .into(),
        ));
    }
    Ok(())
}

/// Per-replicate estimator values, indexed `[grid point][replicate]`.
pub fn conditional_values(
    reps: &Replicates,
    jm: &JointModel,
    grid: &[f64],
    kind: ConditionalKind,
) -> Result<Vec<Vec<f64>>> {
    check_capability(reps, jm, kind)?;
    let n = jm.dim();
    let scale = if kind.is_ak() { 1.0 } else { 1.0 / n as f64 };
    let rows: Vec<Result<Vec<f64>>> = (0..reps.len())
        .into_par_iter()
        .map(|r| {
            let x = reps.row(r);
            let per_s = if kind.is_extended() {
                let a = match jm.dependence() {
                    Dependence::Archimedean(a) => a,
                    _ => unreachable!("checked above"),
                };
                let z = reps.frailty(r).expect("checked above");
                let (sum_minus, max_minus) = leave_one_out(x);
                grid.iter()
                    .map(|&s| {
                        let mut acc = 0.0;
                        for (i, m) in jm.marginals().iter().enumerate() {
                            if kind.is_ak() && max_minus[i] + sum_minus[i] > s {
                                continue;
                            }
                            acc += ext_conditional(a, m, s - sum_minus[i], z);
                        }
                        acc * scale
                    })
                    .collect()
            } else {
                let ctx = jm.conditional_context(x)?;
                grid.iter()
                    .map(|&s| {
                        let mut acc = 0.0;
                        for i in 0..n {
                            if kind.is_ak() && ctx.max_minus[i] + ctx.sum_minus[i] > s {
                                continue;
                            }
                            acc += jm.conditional_density_at(&ctx, i, s - ctx.sum_minus[i]);
                        }
                        acc * scale
                    })
                    .collect()
            };
            Ok(per_s)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..grid.len())
        .map(|g| rows.iter().map(|row| row[g]).collect())
        .collect())
}

/// Estimates over a grid; `cpu_seconds` is the wall time of the whole pass.
pub fn conditional_curve(
    reps: &Replicates,
    jm: &JointModel,
    grid: &[f64],
    kind: ConditionalKind,
) -> Result<Vec<EstimatorOutput>> {
    let start = Instant::now();
    let values = conditional_values(reps, jm, grid, kind)?;
    let mut out: Vec<EstimatorOutput> = values
        .iter()
        .map(|v| EstimatorOutput::from_values(v, 0.0))
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    for o in &mut out {
        o.cpu_seconds = elapsed;
    }
    Ok(out)
}

pub fn estimate_cond(reps: &Replicates, jm: &JointModel, s: f64) -> Result<EstimatorOutput> {
    Ok(conditional_curve(reps, jm, &[s], ConditionalKind::Cond)?[0])
}

pub fn estimate_ext_cond(reps: &Replicates, jm: &JointModel, s: f64) -> Result<EstimatorOutput> {
    Ok(conditional_curve(reps, jm, &[s], ConditionalKind::ExtCond)?[0])
}

pub fn estimate_ak(
    reps: &Replicates,
    jm: &JointModel,
    s: f64,
    extended: bool,
) -> Result<EstimatorOutput> {
    let kind = if extended {
        ConditionalKind::AkExt
    } else {
        ConditionalKind::Ak
    };
    Ok(conditional_curve(reps, jm, &[s], kind)?[0])
}
