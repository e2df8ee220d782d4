use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{normal_pdf, pairwise_sum};
use crate::stats;

/// Silverman's rule of thumb: 0.9·min(sd, IQR/1.34)·m^(-1/5). Falls back to
/// the standard deviation when the interquartile range is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::Domain("bandwidth needs at least two samples".into()));
    }
    let sd = stats::variance(samples).sqrt();
    if !(sd > 0.0) {
        return Err(Error::Domain(
            "bandwidth undefined for zero-variance samples".into(),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = stats::quantile_sorted(&sorted, 0.75) - stats::quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (m as f64).powf(-0.2))
}

/// Gaussian kernel density estimate on `grid` with Silverman's bandwidth.
pub fn kde(samples: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let h = silverman_bandwidth(samples)?;
    let scale = 1.0 / (samples.len() as f64 * h);
    Ok(grid
        .par_iter()
        .map(|&s| {
            let terms: Vec<f64> = samples.iter().map(|&x| normal_pdf((s - x) / h)).collect();
            pairwise_sum(&terms) * scale
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let xs = [-1.0, 1.0];
        let h = silverman_bandwidth(&xs).unwrap();
        // sd = √2, IQR = 1 → spread 1/1.34
        assert!((h - 0.9 / 1.34 * 2f64.powf(-0.2)).abs() < 1e-15);
        let f = kde(&xs, &[0.0]).unwrap()[0];
        assert!((f - normal_pdf(1.0 / h) / h).abs() < 1e-15);
    }

    #[test]
    fn constant_samples_rejected() {
        assert!(silverman_bandwidth(&[3.0; 10]).is_err());
        assert!(kde(&[1.0], &[0.0]).is_err());
    }
}
