//! Test oracles. Nothing here calls into the estimator code paths.
#![allow(dead_code)]

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use sumdens::Marginal;

pub const SEED: u64 = 1;

pub fn ln_factorial(k: u32) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// Density of the sum of k iid Exp(1).
pub fn erlang_pdf(k: u32, s: f64) -> f64 {
    ((k - 1) as f64 * s.ln() - s - ln_factorial(k - 1)).exp()
}

pub fn erlang_cdf(k: u32, s: f64) -> f64 {
    1.0 - (0..k)
        .map(|j| (j as f64 * s.ln() - s - ln_factorial(j)).exp())
        .sum::<f64>()
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (v / xs.len() as f64).sqrt()
}

/// |a − b| in units of the combined standard error.
pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    let se = (se_a * se_a + se_b * se_b).sqrt();
    if se == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b).abs() / se
    }
}

/// Density of a sum of independent positive variables by convolving cell
/// masses on [0, upper) with step h. Valid for s < upper.
pub struct FftDensity {
    h: f64,
    offset: f64,
    density: Vec<f64>,
}

impl FftDensity {
    pub fn new(marginals: &[Marginal], h: f64, upper: f64) -> Self {
        let cells = (upper / h).round() as usize;
        let size = (marginals.len() * cells).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut acc = vec![Complex64::new(1.0, 0.0); size];
        for m in marginals {
            let mut buf = vec![Complex64::new(0.0, 0.0); size];
            for (j, b) in buf.iter_mut().take(cells).enumerate() {
                let lo = m.cdf(j as f64 * h);
                let hi = m.cdf((j + 1) as f64 * h);
                // upper-tail differences keep precision where the cdf is near 1
                let mass = if lo > 0.5 {
                    m.sf(j as f64 * h) - m.sf((j + 1) as f64 * h)
                } else {
                    hi - lo
                };
                *b = Complex64::new(mass, 0.0);
            }
            fwd.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a *= b;
            }
        }
        inv.process(&mut acc);
        let density = acc[..cells]
            .iter()
            .map(|c| c.re / size as f64 / h)
            .collect();
        Self {
            h,
            // a sum of floored values sits on average n/2 cells below the sum
            offset: marginals.len() as f64 * 0.5 * h,
            density,
        }
    }

    pub fn at(&self, s: f64) -> f64 {
        let pos = (s - self.offset) / self.h;
        let j = pos.floor() as usize;
        let frac = pos - j as f64;
        self.density[j] * (1.0 - frac) + self.density[j + 1] * frac
    }
}

/// Tanh-sinh quadrature on (a, b); tolerant of endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    let mut h = 0.5;
    for _ in 0..10 {
        let mut sum = 0.0;
        let kmax = (4.0 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = pi2 * t.sinh();
            let x = u.tanh();
            let w = pi2 * t.cosh() / (u.cosh() * u.cosh());
            // distance to the nearer endpoint, formed without cancellation
            let gap = 1.0 / (u.abs().exp() * u.cosh());
            if gap == 0.0 || w < 1e-300 {
                continue;
            }
            let point = if x < 0.0 {
                a + half * gap
            } else {
                b - half * gap
            };
            let point = if k == 0 { mid } else { point };
            let v = f(point);
            if v.is_finite() {
                sum += w * v;
            }
        }
        let est = half * h * sum;
        if (est - prev).abs() <= 1e-13 * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
        h *= 0.5;
    }
    prev
}

/// Ridders' polynomial extrapolation of central differences of f at x.
pub fn ridders<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> f64 {
    ridders_with_error(f, x, h0).0
}

/// Ridders derivative and its extrapolation error estimate.
pub fn ridders_with_error<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> (f64, f64) {
    const NTAB: usize = 10;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut hh = h0;
    a[0][0] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        hh /= CON;
        a[0][i] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let errt = (a[j][i] - a[j - 1][i])
                .abs()
                .max((a[j][i] - a[j - 1][i - 1]).abs());
            if errt <= err {
                err = errt;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// Debye function D₁(θ) = (1/θ)∫₀^θ t/(eᵗ − 1) dt.
pub fn debye1(theta: f64) -> f64 {
    tanh_sinh(|t| if t == 0.0 { 1.0 } else { t / t.exp_m1() }, 0.0, theta) / theta
}

/// Kendall's τ of the Frank copula.
pub fn frank_tau(theta: f64) -> f64 {
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

pub fn frank_cdf(theta: f64, u: f64, v: f64) -> f64 {
    -(1.0 / theta)
        * (1.0 + ((-theta * u).exp_m1() * (-theta * v).exp_m1()) / (-theta).exp_m1()).ln()
}

/// Kendall's τ from disjoint pairs of draws, with its iid standard error.
pub fn kendall_disjoint(x: &[f64], y: &[f64]) -> (f64, f64) {
    let signs: Vec<f64> = (0..x.len() / 2)
        .map(|m| {
            let (a, b) = (2 * m, 2 * m + 1);
            ((x[a] - x[b]) * (y[a] - y[b])).signum()
        })
        .collect();
    (mean(&signs), se(&signs))
}

/// Mean and sd of z₃ given (z₁, z₂) for a 3×3 correlation matrix, from the
/// Schur complement with an explicit 2×2 inverse.
pub fn schur_conditional_3(sigma: [[f64; 3]; 3], z1: f64, z2: f64) -> (f64, f64) {
    let det = sigma[0][0] * sigma[1][1] - sigma[0][1] * sigma[1][0];
    let inv = [
        [sigma[1][1] / det, -sigma[0][1] / det],
        [-sigma[1][0] / det, sigma[0][0] / det],
    ];
    let c = [sigma[2][0], sigma[2][1]];
    let w = [
        c[0] * inv[0][0] + c[1] * inv[1][0],
        c[0] * inv[0][1] + c[1] * inv[1][1],
    ];
    let mean = w[0] * z1 + w[1] * z2;
    let var = sigma[2][2] - (w[0] * c[0] + w[1] * c[1]);
    (mean, var.sqrt())
}
