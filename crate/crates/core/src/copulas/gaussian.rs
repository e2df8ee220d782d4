use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Parameters of a univariate normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondNormal {
    pub mean: f64,
    pub sd: f64,
}

/// Gaussian copula with correlation matrix Σ, stored with its lower Cholesky
/// factor. Equicorrelated matrices Σ = ρ𝟏𝟏ᵀ + (1 − ρ)I also keep ρ for
/// closed-form conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCopula {
    n: usize,
    sigma: Vec<f64>,
    chol: Vec<f64>,
    equicorr: Option<f64>,
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            let v = a[i * n + j] - dot;
            if i == j {
                if v <= 0.0 || !v.is_finite() {
                    return None;
                }
                l[i * n + i] = v.sqrt();
            } else {
                l[i * n + j] = v / l[j * n + j];
            }
        }
    }
    Some(l)
}

impl GaussianCopula {
    /// From a row-major n×n correlation matrix.
    pub fn new(sigma: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 || sigma.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "correlation matrix must be n×n with n ≥ 1, got {} entries for n = {n}",
                sigma.len()
            )));
        }
        for i in 0..n {
            if (sigma[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("Σ[{i},{i}] must be 1")));
            }
            for j in 0..i {
                if (sigma[i * n + j] - sigma[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter("Σ must be symmetric".into()));
                }
            }
        }
        let chol = cholesky(&sigma, n)
            .ok_or_else(|| Error::InvalidParameter("Σ is not positive definite".into()))?;
        Ok(Self {
            n,
            sigma,
            chol,
            equicorr: None,
        })
    }

    /// Σ = ρ𝟏𝟏ᵀ + (1 − ρ)I; requires −1/(n − 1) < ρ < 1.
    pub fn equicorrelated(n: usize, rho: f64) -> Result<Self> {
        let lower = if n > 1 {
            -1.0 / (n as f64 - 1.0)
        } else {
            f64::NEG_INFINITY
        };
        if !(rho > lower && rho < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "equicorrelation ρ = {rho} outside ({lower}, 1) for n = {n}"
            )));
        }
        let mut sigma = vec![rho; n * n];
        for i in 0..n {
            sigma[i * n + i] = 1.0;
        }
        let mut gc = Self::new(sigma, n)?;
        gc.equicorr = Some(rho);
        Ok(gc)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::equicorrelated(n, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Lower-triangular Cholesky factor, row-major.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    pub fn equicorrelation(&self) -> Option<f64> {
        self.equicorr
    }

    /// Law of Z_k given Z_1..Z_{k−1} (k is 1-based) under N(0, Σ).
    pub fn conditional(&self, k: usize, z_prefix: &[f64]) -> Result<CondNormal> {
        self.check_conditional(k, z_prefix)?;
        Ok(match self.equicorr {
            Some(rho) => equicorr_conditional(rho, k, z_prefix.iter().sum()),
            None => self.conditional_cholesky_unchecked(k, z_prefix),
        })
    }

    /// Same as [`GaussianCopula::conditional`] but always via the Cholesky factor.
    pub fn conditional_cholesky(&self, k: usize, z_prefix: &[f64]) -> Result<CondNormal> {
        self.check_conditional(k, z_prefix)?;
        Ok(self.conditional_cholesky_unchecked(k, z_prefix))
    }

    fn check_conditional(&self, k: usize, z_prefix: &[f64]) -> Result<()> {
        if k == 0 || k > self.n {
            return Err(Error::Domain(format!(
                "coordinate {k} out of range 1..={}",
                self.n
            )));
        }
        if z_prefix.len() != k - 1 {
            return Err(Error::Domain(format!(
                "conditioning on coordinate {k} needs {} values, got {}",
                k - 1,
                z_prefix.len()
            )));
        }
        if z_prefix.iter().any(|z| !z.is_finite()) {
            return Err(Error::Domain("conditioning values must be finite".into()));
        }
        Ok(())
    }

    fn conditional_cholesky_unchecked(&self, k: usize, z_prefix: &[f64]) -> CondNormal {
        let n = self.n;
        let row = k - 1;
        // whiten the prefix: L_{1:k−1} w = z
        let mut w = Vec::with_capacity(row);
        for i in 0..row {
            let dot: f64 = (0..i).map(|j| self.chol[i * n + j] * w[j]).sum();
            w.push((z_prefix[i] - dot) / self.chol[i * n + i]);
        }
        let mean = (0..row).map(|j| self.chol[row * n + j] * w[j]).sum();
        CondNormal {
            mean,
            sd: self.chol[row * n + row],
        }
    }

    /// Row `k` (0-based) of the Cholesky factor: coefficients on the whitened prefix
    /// and the conditional standard deviation.
    pub(crate) fn chol_row(&self, k: usize) -> (&[f64], f64) {
        let n = self.n;
        (&self.chol[k * n..k * n + k], self.chol[k * n + k])
    }

    /// Σ⁻¹ z
    pub fn precision_times(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        if let Some(rho) = self.equicorr {
            let total: f64 = z.iter().sum();
            let c = rho / (1.0 + (n as f64 - 1.0) * rho);
            return z.iter().map(|zi| (zi - c * total) / (1.0 - rho)).collect();
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let dot: f64 = (0..i).map(|j| self.chol[i * n + j] * y[j]).sum();
            y[i] = (z[i] - dot) / self.chol[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let dot: f64 = (i + 1..n).map(|j| self.chol[j * n + i] * x[j]).sum();
            x[i] = (y[i] - dot) / self.chol[i * n + i];
        }
        x
    }

    pub fn log_det(&self) -> f64 {
        if let Some(rho) = self.equicorr {
            let n = self.n as f64;
            return (n - 1.0) * (-rho).ln_1p() + ((n - 1.0) * rho).ln_1p();
        }
        2.0 * (0..self.n)
            .map(|i| self.chol[i * self.n + i].ln())
            .sum::<f64>()
    }

    /// ln c(u) in normal scores: ln φ_Σ(z) − Σᵢ ln φ(zᵢ).
    pub fn log_copula_density(&self, z: &[f64]) -> f64 {
        let q = self.precision_times(z);
        let quad: f64 = z.iter().zip(&q).map(|(a, b)| a * b).sum();
        let norm2: f64 = z.iter().map(|a| a * a).sum();
        -0.5 * (quad - norm2) - 0.5 * self.log_det()
    }

    /// One draw of the latent vector Z ~ N(0, Σ).
    pub fn sample_latent<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.n;
        let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        (0..n)
            .map(|i| (0..=i).map(|j| self.chol[i * n + j] * w[j]).sum())
            .collect()
    }
}

/// Closed-form conditioning for the equicorrelated case, given the sum of the
/// first k − 1 latent values.
pub(crate) fn equicorr_conditional(rho: f64, k: usize, prefix_sum: f64) -> CondNormal {
    let km2 = k as f64 - 2.0;
    let denom = 1.0 + km2 * rho;
    CondNormal {
        mean: rho / denom * prefix_sum,
        sd: ((1.0 - rho) * (1.0 + (k as f64 - 1.0) * rho) / denom).sqrt(),
    }
}
