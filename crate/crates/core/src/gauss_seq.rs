//! Smooth estimators of the cdf and pdf of S for positive summands under a
//! Gaussian copula.
//!
//! The components of Y = X/s are drawn one at a time, each from its
//! conditional law truncated so that the running sum stays below 1. With
//! αₖ the probability of the k-th truncation event, Πₖ αₖ estimates F_S(s)
//! and (Y·∇log f_X(sY) + n/s)·Πₖ αₖ estimates f_S(s). Both are smooth in s
//! for a fixed driving uniform vector U.

use std::time::Instant;

use rayon::prelude::*;

use crate::copulas::GaussianCopula;
use crate::error::{Error, Result};
use crate::estimators::EstimatorOutput;
use crate::joint::{Dependence, JointModel};
use crate::rng::{open01, substream, Purpose};
use crate::special::{normal_log_cdf, normal_quantile_log};

const MAX_REDRAWS: usize = 64;

/// One sequential draw at a fixed s.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialDraw {
    pub s: f64,
    /// X = sY
    pub x: Vec<f64>,
    /// Y, with yₖ > 0 and 𝟏·y ≤ 1.
    pub y: Vec<f64>,
    /// ln αₖ, each αₖ ∈ (0, 1].
    pub log_alphas: Vec<f64>,
    /// Latent normal values Zₖ.
    pub z: Vec<f64>,
    /// Driving uniforms.
    pub u: Vec<f64>,
}

impl SequentialDraw {
    pub fn alphas(&self) -> Vec<f64> {
        self.log_alphas.iter().map(|a| a.exp()).collect()
    }
}

enum Conditioning<'a> {
    Independent,
    Equicorrelated(f64),
    Cholesky(&'a GaussianCopula),
}

fn conditioning(jm: &JointModel) -> Result<Conditioning<'_>> {
    if let Some(m) = jm.marginals().iter().find(|m| !m.is_positive()) {
        return Err(Error::Capability(format!(
            "the sequential estimator needs positive summands, got {m}"
        )));
    }
    match jm.dependence() {
        Dependence::Independence => Ok(Conditioning::Independent),
        Dependence::Gaussian(gc) => Ok(match gc.equicorrelation() {
            Some(rho) => Conditioning::Equicorrelated(rho),
            None => Conditioning::Cholesky(gc),
        }),
        Dependence::Archimedean(_) => Err(Error::Capability(
            "sequential conditioning is only available for the Gaussian copula".into(),
        )),
    }
}

/// Draws Y sequentially at level s from the uniforms `u`.
pub fn sequential_draw(jm: &JointModel, s: f64, u: &[f64]) -> Result<SequentialDraw> {
    let cond = conditioning(jm)?;
    let n = jm.dim();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!(
            "the sequential estimator needs s > 0, got {s}"
        )));
    }
    if u.len() != n || u.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain(format!("need {n} uniforms in (0, 1)")));
    }
    let mut x = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut log_alphas = Vec::with_capacity(n);
    // running remainder s − Σxⱼ
    let mut budget = s;
    let mut z_sum = 0.0;
    for (k, m) in jm.marginals().iter().enumerate() {
        if !(budget > 0.0) {
            return Err(Error::Domain(format!("no budget left at component {k}")));
        }
        let (mean, sd) = match &cond {
            Conditioning::Independent => (0.0, 1.0),
            Conditioning::Equicorrelated(rho) => {
                let c = crate::copulas::equicorr_conditional(*rho, k + 1, z_sum);
                (c.mean, c.sd)
            }
            Conditioning::Cholesky(gc) => {
                let (row, sd) = gc.chol_row(k);
                (row.iter().zip(&w).map(|(a, b)| a * b).sum(), sd)
            }
        };
        let z_cap = m.to_normal(budget);
        let log_alpha = normal_log_cdf((z_cap - mean) / sd);
        if log_alpha == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "truncation probability underflowed at component {k}"
            )));
        }
        let wk = normal_quantile_log(u[k].ln() + log_alpha);
        let zk = mean + sd * wk;
        let xk = m.from_normal(zk).min(budget);
        if !(xk > 0.0) {
            return Err(Error::Domain(format!(
                "component {k} collapsed to the boundary"
            )));
        }
        budget -= xk;
        z_sum += zk;
        w.push(wk);
        z.push(zk);
        x.push(xk);
        log_alphas.push(log_alpha);
    }
    let y = x.iter().map(|v| v / s).collect();
    Ok(SequentialDraw {
        s,
        x,
        y,
        log_alphas,
        z,
        u: u.to_vec(),
    })
}

/// Πₖ αₖ, an unbiased estimate of F_S(s).
pub fn cdf_estimate(draw: &SequentialDraw) -> f64 {
    draw.log_alphas.iter().sum::<f64>().exp()
}

/// (Y·∇log f_X(sY) + n/s)·Πₖ αₖ, an unbiased estimate of f_S(s).
pub fn pdf_estimate(jm: &JointModel, s: f64, draw: &SequentialDraw) -> Result<f64> {
    if draw.s != s {
        return Err(Error::Domain(format!(
            "draw was made at s = {}, not {s}",
            draw.s
        )));
    }
    let score = jm.score(&draw.x)?;
    let n = jm.dim() as f64;
    let weight: f64 = draw.y.iter().zip(&score).map(|(y, g)| y * g).sum::<f64>() + n / s;
    Ok(weight * cdf_estimate(draw))
}

/// How the driving uniforms relate across grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UCoupling {
    /// One U per replicate reused at every s; curves are smooth in s.
    #[default]
    Common,
    /// Fresh U for every (replicate, s) pair.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub s: f64,
    pub pdf: EstimatorOutput,
    pub cdf: EstimatorOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub points: Vec<CurvePoint>,
    /// Draws that hit a numerical boundary and were redrawn.
    pub rejected: usize,
    pub cpu_seconds: f64,
}

fn uniforms(seed: u64, purpose: Purpose, index: u64, n: usize) -> Vec<f64> {
    let mut rng = substream(seed, purpose, index);
    (0..n).map(|_| open01(&mut rng)).collect()
}

/// Sequential pdf and cdf estimates over a positive grid from `r` replicates.
pub fn density_curve(
    jm: &JointModel,
    grid: &[f64],
    r: usize,
    seed: u64,
    coupling: UCoupling,
) -> Result<DensityCurve> {
    conditioning(jm)?;
    if let Some(&s) = grid.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Domain(format!("grid point {s} is not positive")));
    }
    if r == 0 {
        return Err(Error::Domain("at least one replicate is required".into()));
    }
    let start = Instant::now();
    let n = jm.dim();
    let g = grid.len();
    let rows: Vec<Result<(Vec<(f64, f64)>, usize)>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let common = uniforms(seed, Purpose::SequentialUniforms, rep as u64, n);
            let mut rejected = 0;
            let mut out = Vec::with_capacity(g);
            for (gi, &s) in grid.iter().enumerate() {
                let mut u = match coupling {
                    UCoupling::Common => common.clone(),
                    UCoupling::Independent => {
                        uniforms(seed, Purpose::SequentialUniforms, (rep * g + gi) as u64 + r as u64, n)
                    }
                };
                let mut attempt = 0;
                let value = loop {
                    let attempt_result = sequential_draw(jm, s, &u)
                        .and_then(|d| Ok((pdf_estimate(jm, s, &d)?, cdf_estimate(&d))));
                    match attempt_result {
                        Ok(v) => break v,
                        Err(e) => {
                            attempt += 1;
                            rejected += 1;
                            if attempt >= MAX_REDRAWS {
                                return Err(Error::Domain(format!(
                                    "replicate {rep} at s = {s}: {MAX_REDRAWS} consecutive boundary draws ({e})"
                                )));
                            }
                            let index = ((rep * g + gi) as u64) * MAX_REDRAWS as u64 + attempt as u64;
                            u = uniforms(seed, Purpose::SequentialRedraw, index, n);
                        }
                    }
                };
                out.push(value);
            }
            Ok((out, rejected))
        })
        .collect();
    let mut per_rep = Vec::with_capacity(r);
    let mut rejected = 0;
    for row in rows {
        let (vals, rej) = row?;
        rejected += rej;
        per_rep.push(vals);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let points = grid
        .iter()
        .enumerate()
        .map(|(gi, &s)| {
            let pdf: Vec<f64> = per_rep.iter().map(|v| v[gi].0).collect();
            let cdf: Vec<f64> = per_rep.iter().map(|v| v[gi].1).collect();
            CurvePoint {
                s,
                pdf: EstimatorOutput::from_values(&pdf, elapsed),
                cdf: EstimatorOutput::from_values(&cdf, elapsed),
            }
        })
        .collect();
    Ok(DensityCurve {
        points,
        rejected,
        cpu_seconds: elapsed,
    })
}
