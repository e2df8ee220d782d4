//! Joint density of X under a copula: log-density, score ∇ log f, and the
//! one-dimensional conditional densities used by conditional estimators.

use rand::Rng;

use crate::copulas::{Archimedean, GaussianCopula, K_MAX};
use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::rng::open01;
use crate::special::{compensated_sum, normal_log_pdf};

// ln(1 − 2⁻⁵³): the largest ln u fed to a generator.
const LN_U_MAX: f64 = -f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    Independence,
    Archimedean(Archimedean),
    Gaussian(GaussianCopula),
}

/// A random vector given by a copula and its n marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    dependence: Dependence,
    marginals: Vec<Marginal>,
}

/// Per-vector quantities that do not depend on the coordinate being
/// replaced: S₋ᵢ, M₋ᵢ and, for Archimedean models, T₋ᵢ = Σ_{j≠i} ψ(F_j(x_j))
/// with ln|φ^{(n−1)}(T₋ᵢ)|.
#[derive(Debug, Clone, Default)]
pub struct ConditionalContext {
    pub sum_minus: Vec<f64>,
    pub max_minus: Vec<f64>,
    t_minus: Vec<f64>,
    log_phi_nm1: Vec<f64>,
}

impl JointModel {
    pub fn new(dependence: Dependence, marginals: Vec<Marginal>) -> Result<Self> {
        let n = marginals.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "at least one marginal is required".into(),
            ));
        }
        for m in &marginals {
            m.validate()?;
        }
        match &dependence {
            Dependence::Gaussian(gc) if gc.dim() != n => {
                return Err(Error::InvalidParameter(format!(
                    "Gaussian copula has dimension {} but {n} marginals were given",
                    gc.dim()
                )));
            }
            Dependence::Archimedean(_) if n + 1 > K_MAX => {
                return Err(Error::Capability(format!(
                    "Archimedean models support at most {} components",
                    K_MAX - 1
                )));
            }
            _ => {}
        }
        Ok(Self {
            dependence,
            marginals,
        })
    }

    pub fn independent(marginals: Vec<Marginal>) -> Result<Self> {
        Self::new(Dependence::Independence, marginals)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    /// Frailty draws accompany samples from this model.
    pub fn has_frailty(&self) -> bool {
        matches!(self.dependence, Dependence::Archimedean(_))
    }

    /// Frailty-extended conditional estimators are available.
    pub fn supports_extended(&self) -> bool {
        matches!(&self.dependence, Dependence::Archimedean(a) if a.supports_extended())
    }

    pub fn supports_conditional(&self) -> bool {
        !matches!(self.dependence, Dependence::Gaussian(_))
    }

    fn ln_u(m: &Marginal, x: f64) -> f64 {
        m.log_cdf(x).min(LN_U_MAX)
    }

    /// ln f_X(x); −∞ outside the support.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "dimension mismatch");
        let log_marg: f64 = self
            .marginals
            .iter()
            .zip(x)
            .map(|(m, &xi)| m.log_pdf(xi))
            .sum();
        if log_marg == f64::NEG_INFINITY || log_marg.is_nan() {
            return f64::NEG_INFINITY;
        }
        match &self.dependence {
            Dependence::Independence => log_marg,
            Dependence::Archimedean(a) => {
                let n = self.dim();
                let mut t = Vec::with_capacity(n);
                let mut log_dpsi = 0.0;
                for (m, &xi) in self.marginals.iter().zip(x) {
                    let g = a.generator_eval_log(Self::ln_u(m, xi));
                    t.push(g.psi);
                    log_dpsi += g.log_neg_dpsi;
                }
                let total = compensated_sum(t);
                a.phi_deriv_unchecked(total, n).log_abs + log_dpsi + log_marg
            }
            Dependence::Gaussian(gc) => {
                let z: Vec<f64> = self
                    .marginals
                    .iter()
                    .zip(x)
                    .map(|(m, &xi)| m.to_normal(xi))
                    .collect();
                if z.iter().any(|v| !v.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                gc.log_copula_density(&z) + log_marg
            }
        }
    }

    /// ∇ log f_X(x) at an interior point.
    pub fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.score_into(x, &mut out)?;
        Ok(out)
    }

    pub fn score_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        assert_eq!(x.len(), n, "dimension mismatch");
        for (i, (m, &xi)) in self.marginals.iter().zip(x).enumerate() {
            if !m.in_interior(xi) {
                return Err(Error::Domain(format!(
                    "score undefined at x[{i}] = {xi} (boundary or outside support of {m})"
                )));
            }
        }
        match &self.dependence {
            Dependence::Independence => {
                for ((o, m), &xi) in out.iter_mut().zip(&self.marginals).zip(x) {
                    *o = m.score(xi);
                }
            }
            Dependence::Archimedean(a) => {
                let evals: Vec<_> = self
                    .marginals
                    .iter()
                    .zip(x)
                    .map(|(m, &xi)| a.generator_eval_log(Self::ln_u(m, xi)))
                    .collect();
                let total = compensated_sum(evals.iter().map(|g| g.psi));
                let log_ratio = a.phi_deriv_unchecked(total, n + 1).log_abs
                    - a.phi_deriv_unchecked(total, n).log_abs;
                for (i, (m, &xi)) in self.marginals.iter().zip(x).enumerate() {
                    let g = &evals[i];
                    let log_f = m.log_pdf(xi);
                    out[i] = (log_ratio + g.log_neg_dpsi + log_f).exp()
                        + g.d2_over_d1 * log_f.exp()
                        + m.score(xi);
                }
            }
            Dependence::Gaussian(gc) => {
                let z: Vec<f64> = self
                    .marginals
                    .iter()
                    .zip(x)
                    .map(|(m, &xi)| m.to_normal(xi))
                    .collect();
                let q = gc.precision_times(&z);
                for (i, (m, &xi)) in self.marginals.iter().zip(x).enumerate() {
                    let jac = (m.log_pdf(xi) - normal_log_pdf(z[i])).exp();
                    out[i] = (z[i] - q[i]) * jac + m.score(xi);
                }
            }
        }
        if out.iter().any(|g| !g.is_finite()) {
            return Err(Error::Domain("score is not finite at this point".into()));
        }
        Ok(())
    }

    /// Precomputes the leave-one-out quantities for vector `x`.
    pub fn conditional_context(&self, x: &[f64]) -> Result<ConditionalContext> {
        let n = self.dim();
        assert_eq!(x.len(), n, "dimension mismatch");
        if let Dependence::Gaussian(_) = self.dependence {
            return Err(Error::Capability(
                "conditional densities of the Gaussian copula are handled by the sequential estimator".into(),
            ));
        }
        let (sum_minus, max_minus) = leave_one_out(x);
        let mut ctx = ConditionalContext {
            sum_minus,
            max_minus,
            ..Default::default()
        };
        if let Dependence::Archimedean(a) = &self.dependence {
            let psi: Vec<f64> = self
                .marginals
                .iter()
                .zip(x)
                .map(|(m, &xi)| a.generator_eval_log(Self::ln_u(m, xi)).psi)
                .collect();
            ctx.t_minus = (0..n)
                .map(|i| {
                    compensated_sum(
                        psi.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, &p)| p),
                    )
                })
                .collect();
            ctx.log_phi_nm1 = ctx
                .t_minus
                .iter()
                .map(|&t| a.phi_deriv_unchecked(t, n - 1).log_abs)
                .collect();
        }
        Ok(ctx)
    }

    /// f_{Xᵢ|X₋ᵢ}(xᵢ) with the conditioning values taken from `ctx`.
    /// Zero outside the interior of the i-th support.
    pub fn conditional_density_at(&self, ctx: &ConditionalContext, i: usize, xi: f64) -> f64 {
        let m = &self.marginals[i];
        if !m.in_interior(xi) {
            return 0.0;
        }
        match &self.dependence {
            Dependence::Independence => m.pdf(xi),
            Dependence::Archimedean(a) => {
                let g = a.generator_eval_log(Self::ln_u(m, xi));
                let t = ctx.t_minus[i] + g.psi;
                let log_num = a.phi_deriv_unchecked(t, self.dim()).log_abs;
                (m.log_pdf(xi) + g.log_neg_dpsi + log_num - ctx.log_phi_nm1[i]).exp()
            }
            Dependence::Gaussian(_) => unreachable!("rejected when building the context"),
        }
    }

    /// f_{Xᵢ|X₋ᵢ}(xᵢ | x₋ᵢ), reading xᵢ and x₋ᵢ from `x`.
    pub fn conditional_density(&self, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.dim() {
            return Err(Error::Domain(format!("coordinate {i} out of range")));
        }
        let ctx = self.conditional_context(x)?;
        Ok(self.conditional_density_at(&ctx, i, x[i]))
    }

    /// f_{Xᵢ|X₋ᵢ,Z}(xᵢ) = −z ψ'(Fᵢ(xᵢ)) fᵢ(xᵢ) exp(−z ψ(Fᵢ(xᵢ))).
    pub fn ext_conditional_density(&self, i: usize, xi: f64, z: f64) -> Result<f64> {
        let a = match &self.dependence {
            Dependence::Archimedean(a) if a.supports_extended() => a,
            _ => return Err(Error::Capability(
                "frailty-extended conditional densities need a Clayton or Gumbel–Hougaard copula"
                    .into(),
            )),
        };
        if i >= self.dim() {
            return Err(Error::Domain(format!("coordinate {i} out of range")));
        }
        if !(z > 0.0) {
            return Err(Error::Domain(format!("frailty must be positive, got {z}")));
        }
        Ok(ext_conditional(a, &self.marginals[i], xi, z))
    }

    /// One draw of X, with the frailty when the model has one.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Option<f64>) {
        match &self.dependence {
            Dependence::Independence => {
                let x = self
                    .marginals
                    .iter()
                    .map(|m| m.quantile(open01(rng)).expect("open-interval uniform"))
                    .collect();
                (x, None)
            }
            Dependence::Archimedean(a) => {
                let (x, z) = a.sample(&self.marginals, rng);
                (x, Some(z))
            }
            Dependence::Gaussian(gc) => {
                let z = gc.sample_latent(rng);
                let x = self
                    .marginals
                    .iter()
                    .zip(&z)
                    .map(|(m, &zi)| m.from_normal(zi))
                    .collect();
                (x, None)
            }
        }
    }
}

pub(crate) fn ext_conditional(a: &Archimedean, m: &Marginal, xi: f64, z: f64) -> f64 {
    if !m.in_interior(xi) {
        return 0.0;
    }
    let g = a.generator_eval_log(JointModel::ln_u(m, xi));
    (z.ln() + g.log_neg_dpsi + m.log_pdf(xi) - z * g.psi).exp()
}

/// (S₋ᵢ, M₋ᵢ) for every i via prefix and suffix scans.
pub fn leave_one_out(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut pre_sum = vec![0.0; n + 1];
    let mut pre_max = vec![f64::NEG_INFINITY; n + 1];
    for i in 0..n {
        pre_sum[i + 1] = pre_sum[i] + x[i];
        pre_max[i + 1] = pre_max[i].max(x[i]);
    }
    let mut suf_sum = vec![0.0; n + 1];
    let mut suf_max = vec![f64::NEG_INFINITY; n + 1];
    for i in (0..n).rev() {
        suf_sum[i] = suf_sum[i + 1] + x[i];
        suf_max[i] = suf_max[i + 1].max(x[i]);
    }
    let sums = (0..n).map(|i| pre_sum[i] + suf_sum[i + 1]).collect();
    let maxes = (0..n).map(|i| pre_max[i].max(suf_max[i + 1])).collect();
    (sums, maxes)
}
