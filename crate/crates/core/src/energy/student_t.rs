//! Student-t distribution functions built on the regularized incomplete beta.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` where the caller supplies both
/// `x` and `y = 1 - x` so that neither has to be formed by subtraction.
fn reg_inc_beta_xy(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(b, a, y) / b
    }
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `0 <= x <= 1`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    reg_inc_beta_xy(a, b, x, 1.0 - x)
}

/// Standard Student-t with `dof` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    dof: f64,
}

impl StudentT {
    /// Panics if `dof` is not positive and finite.
    pub fn new(dof: f64) -> Self {
        assert!(
            dof > 0.0 && dof.is_finite(),
            "degrees of freedom must be positive, got {dof}"
        );
        StudentT { dof }
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn pdf(&self, t: f64) -> f64 {
        let v = self.dof;
        let ln_norm = ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v) - 0.5 * (v * PI).ln();
        (ln_norm - 0.5 * (v + 1.0) * (t * t / v).ln_1p()).exp()
    }

    /// `P(T > |t|)`.
    fn upper_tail_abs(&self, t: f64) -> f64 {
        let v = self.dof;
        let t2 = t * t;
        let x = v / (v + t2);
        let y = t2 / (v + t2);
        0.5 * reg_inc_beta_xy(0.5 * v, 0.5, x, y)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t == f64::INFINITY {
            return 1.0;
        }
        if t == f64::NEG_INFINITY {
            return 0.0;
        }
        let tail = self.upper_tail_abs(t);
        if t > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Inverse CDF for `0 < p < 1`; antisymmetric about `p = 0.5` up to the
    /// rounding of `1 - p`.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "probability must lie in (0, 1), got {p}");
        if p == 0.5 {
            return 0.0;
        }
        if p < 0.5 {
            return -self.upper_quantile(p);
        }
        self.upper_quantile(1.0 - p)
    }

    /// Solves `P(T > t) = q` for `q < 0.5`, giving `t > 0`.
    fn upper_quantile(&self, q: f64) -> f64 {
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        while self.upper_tail_abs(hi) > q {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            // g(x) = tail(x) - q is decreasing in x
            let g = self.upper_tail_abs(x) - q;
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if g == 0.0 {
                return x;
            }
            let slope = -self.pdf(x);
            let mut next = if slope != 0.0 { x - g / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }
}
