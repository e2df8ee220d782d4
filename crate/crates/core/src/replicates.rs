//! Simulated replicate sets shared by all estimators in a run.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::joint::JointModel;
use crate::rng::{substream, Purpose};

/// R draws of X (row-major), with frailties when the sampler produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    n: usize,
    x: Vec<f64>,
    frailty: Option<Vec<f64>>,
}

impl Replicates {
    /// Draws `r` replicates; replicate `i` uses its own substream, so the
    /// result is identical for any worker count.
    pub fn simulate(jm: &JointModel, r: usize, seed: u64) -> Self {
        let draws: Vec<(Vec<f64>, Option<f64>)> = (0..r)
            .into_par_iter()
            .map(|i| jm.sample(&mut substream(seed, Purpose::Replicates, i as u64)))
            .collect();
        let mut x = Vec::with_capacity(r * jm.dim());
        let mut frailty = jm.has_frailty().then(|| Vec::with_capacity(r));
        for (row, z) in draws {
            x.extend_from_slice(&row);
            if let (Some(f), Some(z)) = (frailty.as_mut(), z) {
                f.push(z);
            }
        }
        Self {
            n: jm.dim(),
            x,
            frailty,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, frailty: Option<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "replicate rows must be nonempty and equally long".into(),
            ));
        }
        if let Some(f) = &frailty {
            if f.len() != rows.len() {
                return Err(Error::InvalidParameter(
                    "one frailty value per replicate is required".into(),
                ));
            }
        }
        Ok(Self {
            n,
            x: rows.concat(),
            frailty,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.n)
    }

    pub fn frailty(&self, i: usize) -> Option<f64> {
        self.frailty.as_ref().map(|f| f[i])
    }

    pub fn has_frailty(&self) -> bool {
        self.frailty.is_some()
    }

    /// Sums 𝟏·X per replicate.
    pub fn sums(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    /// FNV-1a hash of the bit patterns, logged so runs can confirm that all
    /// methods saw the same replicate set.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: f64| {
            for b in v.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        self.x.iter().for_each(|&v| eat(v));
        if let Some(f) = &self.frailty {
            f.iter().for_each(|&v| eat(v));
        }
        h
    }
}
