use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{open01, substream, Purpose};

/// A target density known up to a constant, with its gradient.
pub trait LogTarget: Sync {
    fn dim(&self) -> usize;
    fn log_density_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>);
}

/// Standard normal in `dim` dimensions, unnormalized.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalTarget {
    dim: usize,
}

impl StandardNormalTarget {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LogTarget for StandardNormalTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (
            -0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            x.iter().map(|v| -v).collect(),
        )
    }
}

/// Adds a constant to another target's log density; the gradient is untouched.
#[derive(Debug, Clone)]
pub struct UnnormalizedDensity<T> {
    pub inner: T,
    pub log_offset: f64,
}

impl<T: LogTarget> LogTarget for UnnormalizedDensity<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (lp, g) = self.inner.log_density_and_grad(x);
        (lp + self.log_offset, g)
    }
}

/// Post-burn-in states of a chain with the score at each state.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    dim: usize,
    samples: Vec<f64>,
    scores: Vec<f64>,
    pub acceptance_rate: f64,
    pub seed: u64,
}

impl Chain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, t: usize) -> &[f64] {
        &self.samples[t * self.dim..(t + 1) * self.dim]
    }

    pub fn score(&self, t: usize) -> &[f64] {
        &self.scores[t * self.dim..(t + 1) * self.dim]
    }

    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.samples
            .iter()
            .skip(i)
            .step_by(self.dim)
            .copied()
            .collect()
    }

    pub fn coordinate_scores(&self, i: usize) -> Vec<f64> {
        self.scores
            .iter()
            .skip(i)
            .step_by(self.dim)
            .copied()
            .collect()
    }

    /// Every `step`-th state of coordinate `i`.
    pub fn thinned_coordinate(&self, i: usize, step: usize) -> Vec<f64> {
        self.coordinate(i)
            .into_iter()
            .step_by(step.max(1))
            .collect()
    }
}

/// Random-walk Metropolis with isotropic proposal N(x, step_var·I). Runs
/// `burn_in` discarded steps, then keeps the next `keep` states (no thinning).
pub fn rw_metropolis<T: LogTarget + ?Sized>(
    target: &T,
    init: &[f64],
    step_var: f64,
    burn_in: usize,
    keep: usize,
    seed: u64,
) -> Result<Chain> {
    if !(step_var > 0.0 && step_var.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "proposal variance must be positive, got {step_var}"
        )));
    }
    let dim = target.dim();
    if init.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "initial state has length {}, target has {dim}",
            init.len()
        )));
    }
    let step_sd = step_var.sqrt();
    let mut rng = substream(seed, Purpose::Mcmc, 0);
    let mut x = init.to_vec();
    let (mut lp, mut grad) = target.log_density_and_grad(&x);
    if !lp.is_finite() {
        return Err(Error::Domain(
            "initial state has zero target density".into(),
        ));
    }
    let mut samples = Vec::with_capacity(keep * dim);
    let mut scores = Vec::with_capacity(keep * dim);
    let mut accepted = 0usize;
    let mut proposal = vec![0.0; dim];
    for step in 0..burn_in + keep {
        for (p, xi) in proposal.iter_mut().zip(&x) {
            let xi_noise: f64 = StandardNormal.sample(&mut rng);
            *p = xi + step_sd * xi_noise;
        }
        let (lp_new, grad_new) = target.log_density_and_grad(&proposal);
        let log_ratio = lp_new - lp;
        if log_ratio >= 0.0 || open01(&mut rng).ln() < log_ratio {
            x.copy_from_slice(&proposal);
            lp = lp_new;
            grad = grad_new;
            if step >= burn_in {
                accepted += 1;
            }
        }
        if step >= burn_in {
            samples.extend_from_slice(&x);
            scores.extend_from_slice(&grad);
        }
    }
    Ok(Chain {
        dim,
        samples,
        scores,
        acceptance_rate: if keep > 0 {
            accepted as f64 / keep as f64
        } else {
            0.0
        },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ramp;
    impl LogTarget for Ramp {
        fn dim(&self) -> usize {
            1
        }
        fn log_density_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
            (x[0], vec![1.0])
        }
    }

    #[test]
    fn uphill_moves_always_accepted() {
        // uphill half always accepted, downhill accepted with mean E[e^{-|Z|}] ≈ 0.52
        let chain = rw_metropolis(&Ramp, &[0.0], 1.0, 0, 20_000, 9).unwrap();
        assert!(
            (chain.acceptance_rate - 0.76).abs() < 0.02,
            "{}",
            chain.acceptance_rate
        );
        assert!(chain.coordinate(0).last().unwrap() > &0.0);
    }

    #[test]
    fn scores_match_states() {
        let t = StandardNormalTarget::new(2);
        let chain = rw_metropolis(&t, &[0.5, -0.5], 0.5, 10, 50, 3).unwrap();
        for i in 0..chain.len() {
            let x = chain.sample(i);
            assert_eq!(chain.score(i), &[-x[0], -x[1]]);
        }
        assert!(chain.acceptance_rate > 0.0 && chain.acceptance_rate < 1.0);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(rw_metropolis(&StandardNormalTarget::new(1), &[0.0], 0.0, 1, 1, 1).is_err());
    }
}
