//! Tails of the symmetric binomial distribution and the bounds built on them.
//!
//! `S(n)` below is a sum of `n` fair Bernoulli variables and `S±(n) = 2S(n) − n`
//! the matching `±1` walk. Natural logarithms throughout, except where a
//! base-2 logarithm is named explicitly.

mod bands;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

pub use bands::{
    collision_free_probability, ln_choose, logbinom_ratio, rk_threshold, rk_threshold_scan,
    theorem_band, Band, BandKind, Regime, RkThreshold, ScanDirection,
};

/// `m · 2^exp`, for point masses far below `f64::MIN_POSITIVE`.
#[derive(Clone, Copy, Debug)]
struct Scaled {
    mant: f64,
    exp: i64,
}

impl Scaled {
    fn ln(self) -> f64 {
        if self.mant == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mant.ln() + self.exp as f64 * LN_2
        }
    }

    fn value(self) -> f64 {
        let mut m = self.mant;
        let mut e = self.exp;
        while e < -1000 {
            m *= 2f64.powi(-1000);
            e += 1000;
            if m == 0.0 {
                return 0.0;
            }
        }
        m * 2f64.powi(e as i32)
    }
}

const RENORM: f64 = 1.157_920_892_373_162e77; // 2^256

/// `C(n, j) / 2^n`, by the multiplicative formula with a running binary
/// exponent. Relative error grows like `min(j, n − j)` ulps.
fn point_mass_scaled(n: u64, j: u64) -> Scaled {
    debug_assert!(j <= n);
    let j = j.min(n - j);
    let mut mant = 1.0f64;
    let mut exp = -(n as i64);
    for i in 1..=j {
        mant *= (n - j + i) as f64 / i as f64;
        if mant > RENORM {
            mant /= RENORM;
            exp += 256;
        }
    }
    Scaled { mant, exp }
}

/// Neumaier-compensated sum of `P(S(n) = j)` over `j ≥ t`, for `t > n/2`.
fn upper_tail_scaled(n: u64, t: u64) -> Scaled {
    debug_assert!(2 * t > n);
    if t > n {
        return Scaled { mant: 0.0, exp: 0 };
    }
    let head = point_mass_scaled(n, t);
    let mut term = head.mant;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut j = t;
    loop {
        let s = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - s) + term
        } else {
            (term - s) + sum
        };
        sum = s;
        if j == n || term < sum * 1e-20 {
            break;
        }
        term *= (n - j) as f64 / (j + 1) as f64;
        j += 1;
    }
    Scaled {
        mant: sum + comp,
        exp: head.exp,
    }
}

/// Exact `P(S(n) ≥ t)` in floating point.
///
/// Relative error stays below `1e−12` for `n ≤ 256` and `1e−9` for
/// `n ≤ 10^6`.
pub fn binom_tail(n: u64, t: i64) -> f64 {
    if t <= 0 {
        return 1.0;
    }
    let t = t as u64;
    if t > n {
        return 0.0;
    }
    if 2 * t > n {
        upper_tail_scaled(n, t).value()
    } else {
        // complement through symmetry: P(S ≤ t − 1) = P(S ≥ n − t + 1)
        1.0 - upper_tail_scaled(n, n - t + 1).value()
    }
}

/// `ln P(S(n) ≥ t)`; finite even where the tail underflows `f64`.
pub fn ln_binom_tail(n: u64, t: i64) -> f64 {
    if t <= 0 {
        return 0.0;
    }
    let t = t as u64;
    if t > n {
        return f64::NEG_INFINITY;
    }
    if 2 * t > n {
        upper_tail_scaled(n, t).ln()
    } else {
        (-upper_tail_scaled(n, n - t + 1).value()).ln_1p()
    }
}

/// `P(S(n) ≥ x)` for real `x`, i.e. `P(S(n) ≥ ⌈x⌉)`.
pub fn binom_tail_real(n: u64, x: f64) -> f64 {
    binom_tail(n, ceil_to_i64(x))
}

fn ceil_to_i64(x: f64) -> i64 {
    let c = x.ceil();
    if c >= i64::MAX as f64 {
        i64::MAX
    } else if c <= i64::MIN as f64 {
        i64::MIN
    } else {
        c as i64
    }
}

/// `P(S(n) = j)` in floating point.
pub fn binom_pmf(n: u64, j: u64) -> f64 {
    if j > n {
        return 0.0;
    }
    point_mass_scaled(n, j).value()
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * BigUint::from(n - j) / BigUint::from(j + 1);
        row.push(c.clone());
    }
    row
}

/// Exact `P(S(n) ≥ t)` as a rational number.
pub fn binom_tail_rational(n: u64, t: i64) -> BigRational {
    let lo = t.max(0) as u64;
    if lo > n {
        return BigRational::zero();
    }
    let row = binomial_row(n);
    let num: BigUint = row[lo as usize..].iter().sum();
    BigRational::new(num.into(), (BigUint::one() << n as usize).into())
}

/// Exact `P(S(n) ≤ t)` as a rational number.
pub fn binom_cdf_rational(n: u64, t: i64) -> BigRational {
    if t < 0 {
        return BigRational::zero();
    }
    let hi = (t as u64).min(n);
    let row = binomial_row(n);
    let num: BigUint = row[..=hi as usize].iter().sum();
    BigRational::new(num.into(), (BigUint::one() << n as usize).into())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// How a [`TailQuery`] is answered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    ExactFloat,
    ExactRational,
    Approximate,
}

/// `P(S(n) ≥ threshold)` for a real threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    pub n: u64,
    pub threshold: f64,
    pub mode: TailMode,
}

/// Rational evaluation is capped at this many trials.
pub const RATIONAL_MAX_N: u64 = 256;

impl TailQuery {
    pub fn evaluate(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        if !self.threshold.is_finite() {
            return Err(Error::param("threshold must be finite"));
        }
        let t = ceil_to_i64(self.threshold);
        match self.mode {
            TailMode::ExactFloat => Ok(binom_tail(self.n, t)),
            TailMode::ExactRational => {
                if self.n > RATIONAL_MAX_N {
                    return Err(Error::param(format!(
                        "rational mode supports n ≤ {RATIONAL_MAX_N}"
                    )));
                }
                Ok(rational_to_f64(&binom_tail_rational(self.n, t)))
            }
            TailMode::Approximate => {
                let c = (self.threshold - (self.n / 2) as f64) / (self.n as f64).sqrt();
                ml_tail(c, self.n, MlForm::Integral)
            }
        }
    }
}

/// Standard normal upper tail `Q(x)`.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian forms of the symmetric binomial tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlForm {
    /// `√(2/π) ∫_c^∞ e^{−2x²} dx`
    Integral,
    /// `e^{−2c²} / (2c√(2π))`
    Closed,
}

/// Approximation to `P(S(n) ≥ ⌊n/2⌋ + c√n)`, with the `1 + o(1)` factor
/// taken as 1.
pub fn ml_tail(c: f64, n: u64, form: MlForm) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    if !c.is_finite() {
        return Err(Error::param("c must be finite"));
    }
    match form {
        // √(2/π)·∫_c^∞ e^{−2x²} dx = Q(2c)
        MlForm::Integral => Ok(normal_upper_tail(2.0 * c)),
        MlForm::Closed => {
            if c <= 0.0 {
                return Err(Error::param("closed form needs c > 0"));
            }
            Ok((-2.0 * c * c).exp() / (2.0 * c * (2.0 * PI).sqrt()))
        }
    }
}

/// The exact tail that [`ml_tail`] approximates.
pub fn ml_exact(c: f64, n: u64) -> f64 {
    binom_tail_real(n, (n / 2) as f64 + c * (n as f64).sqrt())
}

/// Lower estimate of a central point mass next to the exact value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointBound {
    pub bound: f64,
    pub exact: f64,
    /// `exact / bound`; tends to a value ≥ 1 as `n` grows.
    pub ratio: f64,
}

/// `P(S(n) = ⌊n/2⌋ + c) ≳ 2^{−4(c + {n/2})²/n} √(2/(πn))`, for
/// `−⌊n/2⌋ ≤ c ≤ ⌈n/2⌉`.
pub fn binom_point_lower_bound(n: u64, c: i64) -> Result<PointBound> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let half_floor = (n / 2) as i64;
    let half_ceil = n.div_ceil(2) as i64;
    if c < -half_floor || c > half_ceil {
        return Err(Error::param(format!(
            "offset {c} outside [-{half_floor}, {half_ceil}]"
        )));
    }
    let frac = if n % 2 == 1 { 0.5 } else { 0.0 };
    let nf = n as f64;
    let x = c as f64 + frac;
    let bound = 2f64.powf(-4.0 * x * x / nf) * (2.0 / (PI * nf)).sqrt();
    let exact = binom_pmf(n, (half_floor + c) as u64);
    Ok(PointBound {
        bound,
        exact,
        ratio: exact / bound,
    })
}

/// `e^{−a²/(2n)}`, an upper bound on `P(S±(n) > a)`.
pub fn hoeffding_bound(n: u64, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    if a.is_nan() || a <= 0.0 || !a.is_finite() {
        return Err(Error::param("a must be a positive real"));
    }
    Ok((-a * a / (2.0 * n as f64)).exp())
}

/// Exact `P(S±(n) > a) = P(S(n) ≥ ⌊(n + a)/2⌋ + 1)`.
pub fn walk_tail_exact(n: u64, a: f64) -> f64 {
    let x = ((n as f64 + a) / 2.0).floor();
    binom_tail(n, ceil_to_i64(x) + 1)
}

/// Rational form of [`walk_tail_exact`] for integer `a`.
pub fn walk_tail_rational(n: u64, a: i64) -> BigRational {
    binom_tail_rational(n, (n as i64 + a).div_euclid(2) + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn small_tails() {
        assert_eq!(binom_tail(4, 3), 0.3125);
        assert!(rel(binom_tail(8, 5), 93.0 / 256.0) < 1e-15);
        assert_eq!(binom_tail(2, 0), 1.0);
        assert_eq!(binom_tail(2, -3), 1.0);
        assert_eq!(binom_tail(2, 3), 0.0);
        assert_eq!(
            binom_tail_rational(8, 5),
            BigRational::new(93.into(), 256.into())
        );
    }

    #[test]
    fn float_matches_rational_small_grid() {
        for n in 1..=64u64 {
            for t in -1..=(n as i64 + 1) {
                let exact = rational_to_f64(&binom_tail_rational(n, t));
                assert!(rel(binom_tail(n, t), exact) <= 1e-13, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn rational_complement_is_exact() {
        for n in [1u64, 7, 30, 101] {
            for t in 0..=n as i64 + 1 {
                let sum = binom_tail_rational(n, t) + binom_cdf_rational(n, t - 1);
                assert!(sum.is_one());
            }
        }
    }

    #[test]
    fn ln_tail_survives_underflow() {
        let n = 100_000u64;
        assert_eq!(binom_tail(n, n as i64), 0.0);
        let ln = ln_binom_tail(n, n as i64);
        assert!((ln - (-(n as f64) * LN_2)).abs() < 1e-6);
        assert!((ln_binom_tail(40, 25) - binom_tail(40, 25).ln()).abs() < 1e-12);
        assert!((ln_binom_tail(40, 10) - binom_tail(40, 10).ln()).abs() < 1e-12);
    }

    #[test]
    fn large_n_tail_is_sane() {
        // median tail of an even n: (1 + P(S = n/2)) / 2
        let n = 1_000_000u64;
        let expect = 0.5 * (1.0 + binom_pmf(n, n / 2));
        assert!(rel(binom_tail(n, (n / 2) as i64), expect) < 1e-9);
    }

    #[test]
    fn closed_and_integral_forms() {
        let v = ml_tail(2.0, 1, MlForm::Closed).unwrap();
        assert!(rel(v, (-8f64).exp() / (4.0 * (2.0 * PI).sqrt())) < 1e-14);
        assert!((v - 3.346e-5).abs() < 1e-8);
        assert!((ml_tail(1e-12, 1, MlForm::Integral).unwrap() - 0.5).abs() < 1e-10);
        assert!(ml_tail(0.0, 10, MlForm::Closed).is_err());
        let ratio = ml_exact(2.0, 10_000) / ml_tail(2.0, 10_000, MlForm::Closed).unwrap();
        assert!((0.85..=1.15).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn point_bounds() {
        let p = binom_point_lower_bound(100, 0).unwrap();
        assert!((p.bound - 0.079_788_5).abs() < 1e-7);
        assert!((p.exact - 0.079_589_2).abs() < 1e-7);
        assert!((p.ratio - 0.9975).abs() < 1e-4);
        assert_eq!(binom_point_lower_bound(2, 1).unwrap().exact, 0.25);
        let odd = binom_point_lower_bound(101, 0).unwrap();
        let expect = 2f64.powf(-1.0 / 101.0) * (2.0 / (PI * 101.0)).sqrt();
        assert!(rel(odd.bound, expect) < 1e-14);
        let exact = rational_to_f64(&(binom_tail_rational(101, 50) - binom_tail_rational(101, 51)));
        assert!(rel(odd.exact, exact) < 1e-13);
        assert!(binom_point_lower_bound(10, 6).is_err());
        assert!(binom_point_lower_bound(10, -6).is_err());
        assert!(binom_point_lower_bound(11, 6).is_ok());
    }

    #[test]
    fn hoeffding() {
        assert!(rel(hoeffding_bound(50, 10.0).unwrap(), (-1f64).exp()) < 1e-15);
        assert!((hoeffding_bound(50, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!(hoeffding_bound(50, 0.0).is_err());
        // S± > 10 ⇔ S ≥ 31
        assert_eq!(walk_tail_exact(50, 10.0), binom_tail(50, 31));
        assert!(walk_tail_exact(50, 10.0) < hoeffding_bound(50, 10.0).unwrap());
        assert_eq!(
            rational_to_f64(&walk_tail_rational(50, 10)),
            rational_to_f64(&binom_tail_rational(50, 31))
        );
    }

    #[test]
    fn tail_query_modes() {
        let q = |mode| TailQuery {
            n: 8,
            threshold: 4.5,
            mode,
        };
        assert!(rel(q(TailMode::ExactFloat).evaluate().unwrap(), 93.0 / 256.0) < 1e-15);
        assert!(rel(q(TailMode::ExactRational).evaluate().unwrap(), 93.0 / 256.0) < 1e-15);
        let approx = q(TailMode::Approximate).evaluate().unwrap();
        assert!((approx - 93.0 / 256.0).abs() < 0.15);
        let big = TailQuery {
            n: 300,
            threshold: 1.0,
            mode: TailMode::ExactRational,
        };
        assert!(big.evaluate().is_err());
    }
}
