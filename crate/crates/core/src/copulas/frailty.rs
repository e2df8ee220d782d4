//! Samplers for the mixing variables of Marshall–Olkin representations.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::rng::open01;

/// Positive α-stable variable with Laplace transform exp(−t^α), 0 < α ≤ 1,
/// via Kanter's representation (the totally skewed case of Chambers–Mallows–Stuck).
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let u = PI * open01(rng);
    let e: f64 = Exp1.sample(rng);
    let log_z = (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    log_z.exp()
}

/// Logarithmic-series variable with P(Z = k) = p^k / (k θ), p = 1 − e^{−θ},
/// using Kemp's two-uniform method. For θ below 1e-6 returns 1 (the
/// probability of any other value is below 1e-6).
pub fn sample_log_series<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    if theta < 1e-6 {
        return 1.0;
    }
    let p = -(-theta).exp_m1();
    let v = open01(rng);
    if v >= p {
        return 1.0;
    }
    let q = -(-theta * open01(rng)).exp_m1();
    if v < q * q {
        (1.0 + v.ln() / q.ln()).floor()
    } else if v > q {
        1.0
    } else {
        2.0
    }
}
