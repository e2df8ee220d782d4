//! Univariate marginal families used as summands.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    normal_cdf, normal_log_cdf, normal_quantile, normal_quantile_log, LN_SQRT_2PI,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Normal { mu: f64, sigma: f64 },
}

/// Pointwise evaluation of a marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEval {
    pub pdf: f64,
    pub log_pdf: f64,
    pub cdf: f64,
    /// d/dx log pdf; `None` outside the interior of the support.
    pub score: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

impl Marginal {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Marginal::Exponential { rate })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        Ok(Marginal::Weibull { shape, scale })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu must be finite, got {mu}"
            )));
        }
        positive("sigma", sigma)?;
        Ok(Marginal::Lognormal { mu, sigma })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu must be finite, got {mu}"
            )));
        }
        positive("sigma", sigma)?;
        Ok(Marginal::Normal { mu, sigma })
    }

    /// Re-checks parameters of a value built directly from the enum (e.g. deserialized).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Exponential { rate } => Self::exponential(rate).map(|_| ()),
            Marginal::Weibull { shape, scale } => Self::weibull(shape, scale).map(|_| ()),
            Marginal::Lognormal { mu, sigma } => Self::lognormal(mu, sigma).map(|_| ()),
            Marginal::Normal { mu, sigma } => Self::normal(mu, sigma).map(|_| ()),
        }
    }

    /// True when the support is a subset of [0, ∞).
    pub fn is_positive(&self) -> bool {
        !matches!(self, Marginal::Normal { .. })
    }

    /// Closed support bounds.
    pub fn support(&self) -> (f64, f64) {
        if self.is_positive() {
            (0.0, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    pub fn in_interior(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x > lo && x < hi
    }

    // (x/λ)^k for the Weibull-type families.
    #[inline]
    fn hazard_integral(&self, x: f64) -> f64 {
        match *self {
            Marginal::Exponential { rate } => rate * x,
            Marginal::Weibull { shape, scale } => (x / scale).powf(shape),
            _ => unreachable!(),
        }
    }

    #[inline]
    fn std_normal_arg(&self, x: f64) -> f64 {
        match *self {
            Marginal::Lognormal { mu, sigma } => (x.ln() - mu) / sigma,
            Marginal::Normal { mu, sigma } => (x - mu) / sigma,
            _ => unreachable!(),
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    rate.ln() - rate * x
                }
            }
            Marginal::Weibull { shape, scale } => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else if x == 0.0 {
                    if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        -scale.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    let t = x / scale;
                    shape.ln() - scale.ln() + (shape - 1.0) * t.ln() - t.powf(shape)
                }
            }
            Marginal::Lognormal { sigma, .. } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let z = self.std_normal_arg(x);
                    -x.ln() - sigma.ln() - LN_SQRT_2PI - 0.5 * z * z
                }
            }
            Marginal::Normal { sigma, .. } => {
                let z = self.std_normal_arg(x);
                -sigma.ln() - LN_SQRT_2PI - 0.5 * z * z
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Exponential { .. } | Marginal::Weibull { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-self.hazard_integral(x)).exp_m1()
                }
            }
            Marginal::Lognormal { .. } if x <= 0.0 => 0.0,
            _ => normal_cdf(self.std_normal_arg(x)),
        }
    }

    /// Survival function 1 − F(x), accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Marginal::Exponential { .. } | Marginal::Weibull { .. } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-self.hazard_integral(x)).exp()
                }
            }
            Marginal::Lognormal { .. } if x <= 0.0 => 1.0,
            _ => normal_cdf(-self.std_normal_arg(x)),
        }
    }

    /// ln F(x), accurate in both tails.
    pub fn log_cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Exponential { .. } | Marginal::Weibull { .. } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let h = self.hazard_integral(x);
                    if h < std::f64::consts::LN_2 {
                        (-(-h).exp_m1()).ln()
                    } else {
                        (-(-h).exp()).ln_1p()
                    }
                }
            }
            Marginal::Lognormal { .. } if x <= 0.0 => f64::NEG_INFINITY,
            _ => normal_log_cdf(self.std_normal_arg(x)),
        }
    }

    /// ln(1 − F(x)), accurate in both tails.
    pub fn log_sf(&self, x: f64) -> f64 {
        match self {
            Marginal::Exponential { .. } | Marginal::Weibull { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -self.hazard_integral(x)
                }
            }
            Marginal::Lognormal { .. } if x <= 0.0 => 0.0,
            _ => normal_log_cdf(-self.std_normal_arg(x)),
        }
    }

    /// d/dx log pdf(x). Only meaningful on the support interior.
    pub fn score(&self, x: f64) -> f64 {
        match *self {
            Marginal::Exponential { rate } => -rate,
            Marginal::Weibull { shape, scale } => {
                ((shape - 1.0) - shape * (x / scale).powf(shape)) / x
            }
            Marginal::Lognormal { sigma, .. } => {
                let z = self.std_normal_arg(x);
                -(1.0 + z / sigma) / x
            }
            Marginal::Normal { sigma, .. } => -self.std_normal_arg(x) / sigma,
        }
    }

    pub fn eval(&self, x: f64) -> MarginalEval {
        let log_pdf = self.log_pdf(x);
        MarginalEval {
            pdf: log_pdf.exp(),
            log_pdf,
            cdf: self.cdf(x),
            score: self.in_interior(x).then(|| self.score(x)),
        }
    }

    /// F⁻¹(u) for u in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!(
                "quantile requires 0 < u < 1, got {u}"
            )));
        }
        Ok(match *self {
            Marginal::Exponential { rate } => -(-u).ln_1p() / rate,
            Marginal::Weibull { shape, scale } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Marginal::Lognormal { mu, sigma } => (mu + sigma * normal_quantile(u)).exp(),
            Marginal::Normal { mu, sigma } => mu + sigma * normal_quantile(u),
        })
    }

    /// F⁻¹(exp(ln_u)); keeps precision when u is within rounding of 1.
    /// Returns the upper support endpoint when ln_u = 0.
    pub fn quantile_from_log_cdf(&self, ln_u: f64) -> f64 {
        match *self {
            Marginal::Exponential { rate } => -(-ln_u.exp_m1()).ln() / rate,
            Marginal::Weibull { shape, scale } => {
                scale * (-(-ln_u.exp_m1()).ln()).powf(1.0 / shape)
            }
            Marginal::Lognormal { mu, sigma } => (mu + sigma * normal_quantile_log(ln_u)).exp(),
            Marginal::Normal { mu, sigma } => mu + sigma * normal_quantile_log(ln_u),
        }
    }

    /// Normal score Φ⁻¹(F(x)), computed without passing through F(x) where
    /// that would lose the tail.
    pub fn to_normal(&self, x: f64) -> f64 {
        match self {
            Marginal::Lognormal { .. } if x <= 0.0 => f64::NEG_INFINITY,
            Marginal::Lognormal { .. } | Marginal::Normal { .. } => self.std_normal_arg(x),
            _ => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let log_cdf = self.log_cdf(x);
                if log_cdf < -std::f64::consts::LN_2 {
                    normal_quantile_log(log_cdf)
                } else {
                    -normal_quantile_log(self.log_sf(x))
                }
            }
        }
    }

    /// F⁻¹(Φ(z)), the inverse of [`Marginal::to_normal`].
    pub fn from_normal(&self, z: f64) -> f64 {
        match *self {
            Marginal::Lognormal { mu, sigma } => (mu + sigma * z).exp(),
            Marginal::Normal { mu, sigma } => mu + sigma * z,
            Marginal::Exponential { rate } => -normal_log_cdf(-z) / rate,
            Marginal::Weibull { shape, scale } => scale * (-normal_log_cdf(-z)).powf(1.0 / shape),
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Exponential { rate } => write!(f, "Exp({rate})"),
            Marginal::Weibull { shape, scale } => write!(f, "Weibull({shape}, {scale})"),
            Marginal::Lognormal { mu, sigma } => write!(f, "Lognormal({mu}, {sigma})"),
            Marginal::Normal { mu, sigma } => write!(f, "Normal({mu}, {sigma})"),
        }
    }
}
