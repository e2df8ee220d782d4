//! Scalar kernels shared across the crate: the standard normal distribution
//! (density, cdf, log-cdf, quantile with log-probability input), signed values
//! kept in log space, and compensated/pairwise summation.

use std::f64::consts::FRAC_1_SQRT_2;

/// ln(2π)/2
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A real number stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub log_abs: f64,
    pub sign: f64,
}

impl SignedLog {
    pub fn new(log_abs: f64, sign: f64) -> Self {
        Self { log_abs, sign }
    }

    pub fn value(&self) -> f64 {
        self.sign * self.log_abs.exp()
    }
}

/// log(Σ exp(xᵢ)), ignoring `-inf` entries.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: smallbuf::Buf = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// log(e^a + e^b)
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

mod smallbuf {
    /// Small stack-first buffer so `log_sum_exp` does not allocate for short inputs.
    pub struct Buf {
        inline: [f64; 48],
        len: usize,
        spill: Vec<f64>,
    }

    impl Buf {
        pub fn iter(&self) -> std::slice::Iter<'_, f64> {
            if self.spill.is_empty() {
                self.inline[..self.len].iter()
            } else {
                self.spill.iter()
            }
        }
    }

    impl FromIterator<f64> for Buf {
        fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
            let mut buf = Buf {
                inline: [0.0; 48],
                len: 0,
                spill: Vec::new(),
            };
            for x in iter {
                if buf.spill.is_empty() && buf.len < buf.inline.len() {
                    buf.inline[buf.len] = x;
                    buf.len += 1;
                } else {
                    if buf.spill.is_empty() {
                        buf.spill.extend_from_slice(&buf.inline[..buf.len]);
                    }
                    buf.spill.push(x);
                }
            }
            buf
        }
    }
}

/// Neumaier compensated summation.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Pairwise summation with a fixed split order, so the result depends only on
/// the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Φ(x)
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// ln Φ(x), accurate in both tails.
pub fn normal_log_cdf(x: f64) -> f64 {
    if x > 5.0 {
        (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x > -35.0 {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Asymptotic Mills-ratio expansion; erfc underflows below here.
        let x2 = x * x;
        let inv = 1.0 / x2;
        let series = 1.0
            - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv * (1.0 - 9.0 * inv))));
        -0.5 * x2 - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// Φ⁻¹(p) for p in (0, 1). Returns ±∞ at the endpoints and NaN outside.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        return central(q);
    }
    let r = if q < 0.0 { p.ln() } else { (-q - 0.5).ln_1p() };
    let x = tail((-r).sqrt());
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Φ⁻¹(exp(log_p)); usable far beyond the range where exp(log_p) underflows.
pub fn normal_quantile_log(log_p: f64) -> f64 {
    if log_p.is_nan() || log_p > 0.0 {
        return f64::NAN;
    }
    if log_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if log_p == 0.0 {
        return f64::INFINITY;
    }
    let p = log_p.exp();
    if (p - 0.5).abs() <= 0.425 {
        return central(p - 0.5);
    }
    if p < 0.5 {
        -tail((-log_p).sqrt())
    } else {
        // upper tail: r = sqrt(−ln(1 − p))
        tail((-(-log_p.exp_m1()).ln()).sqrt())
    }
}

// Wichura's AS241 (PPND16) rational approximations.
fn central(q: f64) -> f64 {
    let r = 0.180625 - q * q;
    q * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
        + 6.726_577_092_700_87e4)
        * r
        + 4.592_195_393_154_987e4)
        * r
        + 1.373_169_376_550_946e4)
        * r
        + 1.971_590_950_306_551_3e3)
        * r
        + 1.331_416_678_917_843_8e2)
        * r
        + 3.387_132_872_796_366_5)
        / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0)
}

// r = sqrt(-ln(min(p, 1-p))); returns |x|.
fn tail(r: f64) -> f64 {
    if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_758_8)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_879e-1)
                * r
                + 1.0)
    }
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}
