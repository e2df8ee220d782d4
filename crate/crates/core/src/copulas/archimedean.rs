use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::marginals::Marginal;
use crate::special::{ln_gamma, log_add_exp, log_sum_exp, SignedLog};

use super::frailty;

/// Highest derivative order of φ that can be evaluated.
pub const K_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArchimedeanKind {
    Clayton,
    GumbelHougaard,
    Frank,
}

impl fmt::Display for ArchimedeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchimedeanKind::Clayton => "Clayton",
            ArchimedeanKind::GumbelHougaard => "GumbelHougaard",
            ArchimedeanKind::Frank => "Frank",
        })
    }
}

/// Generator ψ and its first two derivatives at a point u ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorEval {
    pub psi: f64,
    pub dpsi: f64,
    pub d2psi: f64,
    /// ln(−ψ'(u)), finite even where ψ' itself under- or overflows.
    pub log_neg_dpsi: f64,
    /// ψ''(u)/ψ'(u)
    pub d2_over_d1: f64,
}

/// An exchangeable Archimedean copula C(u) = φ(Σ ψ(uᵢ)) with φ = ψ⁻¹.
///
/// Conventions: Clayton ψ(u) = u^{−θ} − 1 (θ > 0), Gumbel–Hougaard
/// ψ(u) = (−ln u)^θ (θ ≥ 1), Frank ψ(u) = −ln[(e^{−θu} − 1)/(e^{−θ} − 1)] (θ > 0).
#[derive(Debug, Clone)]
pub struct Archimedean {
    kind: ArchimedeanKind,
    theta: f64,
    // ln of the Gumbel polynomial coefficients, indexed [k][j]
    gumbel: Option<Arc<Vec<Vec<f64>>>>,
}

impl PartialEq for Archimedean {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.theta == other.theta
    }
}

impl Archimedean {
    pub fn new(kind: ArchimedeanKind, theta: f64) -> Result<Self> {
        let ok = theta.is_finite()
            && match kind {
                ArchimedeanKind::Clayton | ArchimedeanKind::Frank => theta > 0.0,
                ArchimedeanKind::GumbelHougaard => theta >= 1.0,
            };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "{kind} copula does not accept θ = {theta}"
            )));
        }
        let gumbel = (kind == ArchimedeanKind::GumbelHougaard)
            .then(|| Arc::new(gumbel_coefficients(1.0 / theta)));
        Ok(Self {
            kind,
            theta,
            gumbel,
        })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(ArchimedeanKind::Clayton, theta)
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(ArchimedeanKind::GumbelHougaard, theta)
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(ArchimedeanKind::Frank, theta)
    }

    pub fn kind(&self) -> ArchimedeanKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Whether estimators may condition on the frailty. Frank draws use a
    /// logarithmic frailty for sampling only.
    pub fn supports_extended(&self) -> bool {
        self.kind != ArchimedeanKind::Frank
    }

    pub fn generator_eval(&self, u: f64) -> Result<GeneratorEval> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!(
                "generator requires 0 < u ≤ 1, got {u}"
            )));
        }
        Ok(self.generator_eval_log(u.ln()))
    }

    /// Generator evaluated from ln u, which callers can supply accurately
    /// when u is within rounding of 1.
    pub fn generator_eval_log(&self, ln_u: f64) -> GeneratorEval {
        let theta = self.theta;
        match self.kind {
            ArchimedeanKind::Clayton => {
                let log_neg_dpsi = theta.ln() - (theta + 1.0) * ln_u;
                let dpsi = -log_neg_dpsi.exp();
                GeneratorEval {
                    psi: (-theta * ln_u).exp_m1(),
                    dpsi,
                    d2psi: theta * (theta + 1.0) * (-(theta + 2.0) * ln_u).exp(),
                    log_neg_dpsi,
                    d2_over_d1: -(theta + 1.0) * (-ln_u).exp(),
                }
            }
            ArchimedeanKind::GumbelHougaard => {
                let l = -ln_u;
                let log_neg_dpsi = theta.ln() + (theta - 1.0) * l.ln() - ln_u;
                let dpsi = -log_neg_dpsi.exp();
                let inv_u = (-ln_u).exp();
                GeneratorEval {
                    psi: l.powf(theta),
                    dpsi,
                    d2psi: theta * l.powf(theta - 2.0) * inv_u * inv_u * (theta - 1.0 + l),
                    log_neg_dpsi,
                    d2_over_d1: -(theta - 1.0 + l) / l * inv_u,
                }
            }
            ArchimedeanKind::Frank => {
                let u = ln_u.exp();
                let one_minus_u = -ln_u.exp_m1();
                let psi = if u > 0.5 {
                    -((-theta).exp() * (theta * one_minus_u).exp_m1() / (-theta).exp_m1()).ln_1p()
                } else {
                    -((-theta * u).exp_m1() / (-theta).exp_m1()).ln()
                };
                let em1 = (theta * u).exp_m1();
                let log_neg_dpsi = theta.ln() - em1.ln();
                let ratio = -theta * (theta * u).exp() / em1;
                let dpsi = -log_neg_dpsi.exp();
                GeneratorEval {
                    psi,
                    dpsi,
                    d2psi: ratio * dpsi,
                    log_neg_dpsi,
                    d2_over_d1: ratio,
                }
            }
        }
    }

    /// φ(t) = ψ⁻¹(t)
    pub fn phi(&self, t: f64) -> f64 {
        self.log_phi(t).exp()
    }

    pub fn log_phi(&self, t: f64) -> f64 {
        match self.kind {
            ArchimedeanKind::Clayton => -t.ln_1p() / self.theta,
            ArchimedeanKind::GumbelHougaard => -t.powf(1.0 / self.theta),
            ArchimedeanKind::Frank => {
                let log_v = self.frank_log_v(t);
                log_v.exp().ln_1p().ln() - self.theta.ln()
            }
        }
    }

    // ln v with v = w/(1 − w), w = (1 − e^{−θ}) e^{−t}.
    fn frank_log_v(&self, t: f64) -> f64 {
        let theta = self.theta;
        let log_w = (-(-theta).exp_m1()).ln() - t;
        let w = log_w.exp();
        let log_1mw = if w < 0.5 {
            (-w).ln_1p()
        } else {
            (-(-t).exp_m1() + (-t - theta).exp()).ln()
        };
        log_w - log_1mw
    }

    /// φ^{(k)}(t) as a signed log. The sign is (−1)^k.
    pub fn phi_deriv(&self, t: f64, k: usize) -> Result<SignedLog> {
        if k > K_MAX {
            return Err(Error::Capability(format!(
                "derivatives of φ are available up to order {K_MAX}, requested {k}"
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "φ derivative requires t ≥ 0, got {t}"
            )));
        }
        Ok(self.phi_deriv_unchecked(t, k))
    }

    pub(crate) fn phi_deriv_unchecked(&self, t: f64, k: usize) -> SignedLog {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 {
            return SignedLog::new(self.log_phi(t), 1.0);
        }
        if t == f64::INFINITY {
            return SignedLog::new(f64::NEG_INFINITY, sign);
        }
        let kf = k as f64;
        let log_abs = match self.kind {
            ArchimedeanKind::Clayton => {
                let a = 1.0 / self.theta;
                ln_gamma(a + kf) - ln_gamma(a) - (a + kf) * t.ln_1p()
            }
            ArchimedeanKind::GumbelHougaard => {
                if self.theta == 1.0 {
                    -t
                } else if t == 0.0 {
                    f64::INFINITY
                } else {
                    let alpha = 1.0 / self.theta;
                    let ln_t = t.ln();
                    let ln_x = alpha * ln_t;
                    let coeffs = &self.gumbel.as_ref().expect("gumbel coefficients")[k];
                    let log_poly =
                        log_sum_exp(coeffs.iter().enumerate().map(|(j, &c)| c + j as f64 * ln_x));
                    -ln_x.exp() - kf * ln_t + log_poly
                }
            }
            ArchimedeanKind::Frank => {
                let ln_v = self.frank_log_v(t);
                let coeffs = &frank_coefficients()[k];
                let log_poly =
                    log_sum_exp(coeffs.iter().enumerate().map(|(j, &c)| c + j as f64 * ln_v));
                log_poly - self.theta.ln()
            }
        };
        SignedLog::new(log_abs, sign)
    }

    /// One draw of the mixing variable Z whose Laplace transform is φ.
    pub fn sample_frailty<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            ArchimedeanKind::Clayton => {
                let gamma = rand_distr::Gamma::new(1.0 / self.theta, 1.0).expect("validated θ");
                gamma.sample(rng)
            }
            ArchimedeanKind::GumbelHougaard => {
                frailty::sample_positive_stable(1.0 / self.theta, rng)
            }
            ArchimedeanKind::Frank => frailty::sample_log_series(self.theta, rng),
        }
    }

    /// Marshall–Olkin draw: Xᵢ = Fᵢ⁻¹(φ(Eᵢ/Z)). Returns the vector and Z.
    pub fn sample<R: Rng + ?Sized>(&self, marginals: &[Marginal], rng: &mut R) -> (Vec<f64>, f64) {
        let z = self.sample_frailty(rng);
        let x = marginals
            .iter()
            .map(|m| {
                let e: f64 = Exp1.sample(rng);
                self.compose(m, e, z)
            })
            .collect();
        (x, z)
    }

    /// F⁻¹(φ(e/z)) for given exponential and frailty values.
    pub fn compose(&self, marginal: &Marginal, e: f64, z: f64) -> f64 {
        marginal.quantile_from_log_cdf(self.log_phi(e / z))
    }
}

/// Coefficients of P_k in (−1)^k φ^{(k)}(t) = φ(t) t^{−k} P_k(t^α) for the
/// Gumbel–Hougaard generator, from P_{k+1}(x) = (k + αx) P_k(x) − αx P_k'(x).
/// All coefficients are nonnegative for α ≤ 1.
fn gumbel_coefficients(alpha: f64) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0]];
    for k in 0..K_MAX {
        let prev = &table[k];
        let mut next = vec![f64::NEG_INFINITY; k + 2];
        for (j, slot) in next.iter_mut().enumerate() {
            let stay = if j <= k {
                let w = k as f64 - alpha * j as f64;
                if w > 0.0 {
                    w.ln() + prev[j]
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                f64::NEG_INFINITY
            };
            let raise = if j >= 1 {
                alpha.ln() + prev[j - 1]
            } else {
                f64::NEG_INFINITY
            };
            *slot = log_add_exp(stay, raise);
        }
        table.push(next);
    }
    table
}

/// Coefficients of Q_k in φ^{(k)} = (−1)^k Q_k(v)/θ for the Frank generator,
/// from Q_1 = v and Q_{k+1}(v) = v(1 + v) Q_k'(v).
fn frank_coefficients() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![vec![f64::NEG_INFINITY], vec![f64::NEG_INFINITY, 0.0]];
        for k in 1..K_MAX {
            let prev = &table[k];
            let mut next = vec![f64::NEG_INFINITY; k + 2];
            for (j, slot) in next.iter_mut().enumerate().skip(1) {
                let a = if j <= k {
                    (j as f64).ln() + prev[j]
                } else {
                    f64::NEG_INFINITY
                };
                let b = if j >= 2 {
                    ((j - 1) as f64).ln() + prev[j - 1]
                } else {
                    f64::NEG_INFINITY
                };
                *slot = log_add_exp(a, b);
            }
            table.push(next);
        }
        table
    })
}
