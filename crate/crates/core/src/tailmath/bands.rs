//! Typical-value bands, the `r_k` deviation threshold, collision
//! probability, and log-binomial helpers.

use serde::{Deserialize, Serialize};

use super::ln_binom_tail;
use crate::error::{Error, Result};

/// `ln C(n, k)`. Exact summation for small `min(k, n − k)`, log-gamma above.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k <= 512 {
        (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
    } else {
        use statrs::function::gamma::ln_gamma;
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }
}

/// Which band to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Family,
    Generator,
    Single,
}

impl BandKind {
    pub fn name(self) -> &'static str {
        match self {
            BandKind::Family => "family",
            BandKind::Generator => "generator",
            BandKind::Single => "single",
        }
    }
}

impl std::str::FromStr for BandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "family" => Ok(BandKind::Family),
            "generator" => Ok(BandKind::Generator),
            "single" | "single-sequence" => Ok(BandKind::Single),
            other => Err(Error::param(format!("unknown band kind {other:?}"))),
        }
    }
}

/// `(lower, upper) = (a·B, b·B)` around the typical size `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    pub n: u64,
    pub k: u64,
    pub cardinality: u64,
    pub coefficient_lower: f64,
    pub coefficient_upper: f64,
    /// `B = √(N(ln C(N,k) + k·ln cardinality))`; `cardinality = 1` for single.
    pub base: f64,
    pub lower: f64,
    pub upper: f64,
    /// Asymptotic hypotheses that this instance violates.
    pub warnings: Vec<String>,
}

impl Band {
    pub fn contains(&self, value: f64) -> bool {
        self.lower < value && value < self.upper
    }
}

/// Typical-value band of `Φ_k`, `Φ̃_k` (coefficients 2/5 and 5/2) or `C_k`
/// (coefficients 2/5 and 7/4).
///
/// Hypothesis violations (`|F| < 2`, `log₂|F| ≥ N/12`,
/// `k > N/(6 log₂|F|)`, or `k > N/4` for single sequences) are reported as
/// warnings.
pub fn theorem_band(n: u64, k: u64, cardinality: u64, kind: BandKind) -> Result<Band> {
    if n < 2 {
        return Err(Error::param("length must be at least 2"));
    }
    if k < 2 {
        return Err(Error::param("order k must be at least 2"));
    }
    if k > n {
        return Err(Error::param(format!("order k = {k} exceeds length {n}")));
    }
    if cardinality == 0 {
        return Err(Error::param("cardinality must be positive"));
    }
    let nf = n as f64;
    let mut warnings = Vec::new();
    let (cardinality, lo, hi) = match kind {
        BandKind::Single => {
            if 4 * k > n {
                warnings.push(format!("k = {k} exceeds N/4 = {}", nf / 4.0));
            }
            (1, 0.4, 1.75)
        }
        BandKind::Family | BandKind::Generator => {
            let log2 = (cardinality as f64).log2();
            if cardinality < 2 {
                warnings.push("cardinality below 2 (needs 1 ≤ log₂ cardinality)".to_string());
            } else {
                if log2 >= nf / 12.0 {
                    warnings.push(format!(
                        "log₂ cardinality = {log2:.3} is not below N/12 = {:.3}",
                        nf / 12.0
                    ));
                }
                let kmax = nf / (6.0 * log2);
                if k as f64 > kmax {
                    warnings.push(format!(
                        "k = {k} exceeds N/(6·log₂ cardinality) = {kmax:.3}"
                    ));
                }
            }
            (cardinality, 0.4, 2.5)
        }
    };
    let base = (nf * (ln_choose(n, k) + k as f64 * (cardinality as f64).ln())).sqrt();
    Ok(Band {
        kind,
        n,
        k,
        cardinality,
        coefficient_lower: lo,
        coefficient_upper: hi,
        base,
        lower: lo * base,
        upper: hi * base,
        warnings,
    })
}

/// `ln C(⌊N/3⌋, k) / ln C(N, k)`, for `2 ≤ k ≤ ⌊N/3⌋`.
pub fn logbinom_ratio(n: u64, k: u64) -> Result<f64> {
    let m = n / 3;
    if k < 2 || k > m {
        return Err(Error::param(format!(
            "need 2 ≤ k ≤ ⌊N/3⌋ = {m}, got k = {k}"
        )));
    }
    Ok(ln_choose(m, k) / ln_choose(n, k))
}

/// Seed-count regime of the `r_k` threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `log₂|S| ≤ m^{1/4}`: threshold `k² ln N / (C(m+1, k−1)·|S|^k)`.
    Small,
    /// `log₂|S| > m^{1/4}`: threshold `k² ln N / ((m+1)^{k−1}·C(|S|, k))`.
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanDirection {
    Ascending,
    Descending,
}

/// Largest deviation `r` whose tail `P(S(m) ≥ (m + r)/2)` still reaches the
/// threshold, with `m = ⌊N/3⌋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RkThreshold {
    pub m: u64,
    pub regime: Regime,
    pub ln_threshold: f64,
    pub threshold: f64,
    pub r: u64,
    /// Set when even `r = 0` misses the threshold; `r` is then reported as 0.
    pub below_zero: bool,
}

pub fn rk_threshold(n: u64, k: u64, seed_count: u64) -> Result<RkThreshold> {
    rk_threshold_scan(n, k, seed_count, ScanDirection::Ascending)
}

/// [`rk_threshold`] with an explicit scan direction: ascending from `r = 0`
/// until the first miss, or descending from `r = m` until the first hit.
pub fn rk_threshold_scan(
    n: u64,
    k: u64,
    seed_count: u64,
    direction: ScanDirection,
) -> Result<RkThreshold> {
    if n < 6 {
        return Err(Error::param("length must be at least 6"));
    }
    if k < 2 {
        return Err(Error::param("order k must be at least 2"));
    }
    if seed_count < 2 {
        return Err(Error::param("seed count must be at least 2"));
    }
    let m = n / 3;
    let ln_s = (seed_count as f64).ln();
    let numerator = 2.0 * (k as f64).ln() + (n as f64).ln().ln();
    let regime = if (seed_count as f64).log2() <= (m as f64).powf(0.25) {
        Regime::Small
    } else {
        Regime::Large
    };
    let ln_threshold = match regime {
        Regime::Small => numerator - ln_choose(m + 1, k - 1) - k as f64 * ln_s,
        Regime::Large => {
            numerator - (k - 1) as f64 * ((m + 1) as f64).ln() - ln_choose(seed_count, k)
        }
    };
    // S is integer-valued: P(S ≥ (m + r)/2) = P(S ≥ ⌈(m + r)/2⌉)
    let passes = |r: u64| ln_binom_tail(m, (m + r).div_ceil(2) as i64) >= ln_threshold;
    let found = match direction {
        ScanDirection::Ascending => {
            if passes(0) {
                let mut r = 0;
                while r < m && passes(r + 1) {
                    r += 1;
                }
                Some(r)
            } else {
                None
            }
        }
        ScanDirection::Descending => (0..=m).rev().find(|&r| passes(r)),
    };
    Ok(RkThreshold {
        m,
        regime,
        ln_threshold,
        threshold: ln_threshold.exp(),
        r: found.unwrap_or(0),
        below_zero: found.is_none(),
    })
}

/// Probability that `seed_count` iid uniform sequences of length `n` are
/// pairwise distinct: `Π_{i<|S|} (1 − i/2^N)`, summed in log space.
pub fn collision_free_probability(n: u32, seed_count: u64) -> f64 {
    if seed_count <= 1 {
        return 1.0;
    }
    if n < 64 && seed_count > 1u64 << n {
        return 0.0;
    }
    let space = 2f64.powi(n as i32);
    let s = seed_count as f64;
    if s / space < 1e-6 {
        // ln(1 − x) = −x − x²/2 − …, summed in closed form over i < S
        let first = s * (s - 1.0) / 2.0 / space;
        let second = (s - 1.0) * s * (2.0 * s - 1.0) / 12.0 / (space * space);
        return (-first - second).exp();
    }
    let ln: f64 = (1..seed_count).map(|i| (-(i as f64) / space).ln_1p()).sum();
    ln.exp()
}
