use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{phi_with, EnumOptions};
use crate::seq::{sample_generator, BinarySequence, SeedStream, SequenceFamily};
use crate::tailmath::collision_free_probability;

pub const ORACLE_MAX_LENGTH: usize = 12;
pub const ORACLE_MAX_FAMILIES: u64 = 10_000_000;

fn choose_capped(n: u64, k: u64, cap: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as u64)
}

fn sequence_from_index(length: usize, index: u64) -> BinarySequence {
    BinarySequence::from_words(length, vec![index]).expect("length fits one word")
}

/// Exact distribution of `Φ_k` over uniformly random families of
/// `family_size` distinct sequences of length `length`.
pub fn exact_distribution_oracle(
    length: usize,
    family_size: usize,
    k: usize,
) -> Result<BTreeMap<u64, f64>> {
    if length == 0 || family_size == 0 {
        return Err(Error::param("length and family size must be positive"));
    }
    if k < 2 || k > length {
        return Err(Error::param(format!("need 2 ≤ k ≤ {length}, got k = {k}")));
    }
    if length > ORACLE_MAX_LENGTH {
        return Err(Error::InstanceTooLarge(format!(
            "length {length} exceeds {ORACLE_MAX_LENGTH}"
        )));
    }
    let universe = 1u64 << length;
    let total =
        choose_capped(universe, family_size as u64, ORACLE_MAX_FAMILIES).ok_or_else(|| {
            Error::InstanceTooLarge(format!(
                "C({universe}, {family_size}) exceeds {ORACLE_MAX_FAMILIES} families"
            ))
        })?;
    if total == 0 {
        return Err(Error::FamilyTooLarge {
            length,
            size: family_size as u64,
        });
    }

    let counts = (0..universe)
        .into_par_iter()
        .map(|first| -> Result<BTreeMap<u64, u64>> {
            let mut counts = BTreeMap::new();
            let mut rest: Vec<u64> = (first + 1..first + family_size as u64).collect();
            if rest.last().is_some_and(|&l| l >= universe) {
                return Ok(counts);
            }
            loop {
                let members = std::iter::once(first)
                    .chain(rest.iter().copied())
                    .map(|i| sequence_from_index(length, i))
                    .collect();
                let family = SequenceFamily::new(members)?;
                let value = phi_with(&family, k, &EnumOptions::unlimited())?.value;
                *counts.entry(value).or_insert(0u64) += 1;
                if !next_combination(&mut rest, universe) {
                    return Ok(counts);
                }
            }
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (v, c) in b {
                *a.entry(v).or_insert(0) += c;
            }
            Ok(a)
        })?;

    Ok(counts
        .into_iter()
        .map(|(v, c)| (v, c as f64 / total as f64))
        .collect())
}

/// Advances a strictly increasing tuple below `limit` in lexicographic order.
fn next_combination(c: &mut [u64], limit: u64) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < limit - (r - i) as u64 {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn empirical_pmf<I: IntoIterator<Item = u64>>(values: I) -> BTreeMap<u64, f64> {
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(v, c)| (v, c as f64 / total as f64))
        .collect()
}

pub fn total_variation(p: &BTreeMap<u64, f64>, q: &BTreeMap<u64, f64>) -> f64 {
    let mut sum = 0.0;
    for (v, a) in p {
        sum += (a - q.get(v).copied().unwrap_or(0.0)).abs();
    }
    for (v, b) in q {
        if !p.contains_key(v) {
            sum += b;
        }
    }
    sum / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub n: usize,
    pub seed_count: u64,
    pub trials: u64,
    pub seed: u64,
    pub collision_free: u64,
    pub empirical: f64,
    pub formula: f64,
    /// Binomial standard error of `empirical` under `formula`.
    pub std_error: f64,
}

/// Fraction of sampled generators without a collision, next to the
/// product formula.
pub fn collision_experiment(
    length: usize,
    seed_count: u64,
    trials: u64,
    seed: u64,
) -> Result<CollisionReport> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if length == 0 || length > u32::MAX as usize {
        return Err(Error::param("length out of range"));
    }
    let count = usize::try_from(seed_count).map_err(|_| Error::param("seed count too large"))?;
    let streams = SeedStream::new(seed);
    let collision_free = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let gen = sample_generator(length, count, &mut streams.rng(t))?;
            Ok(gen.is_injective() as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let formula = collision_free_probability(length as u32, seed_count);
    Ok(CollisionReport {
        n: length,
        seed_count,
        trials,
        seed,
        collision_free,
        empirical: collision_free as f64 / trials as f64,
        formula,
        std_error: (formula * (1.0 - formula) / trials as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::correlation_measure;

    #[test]
    fn length_two_is_constant() {
        let pmf = exact_distribution_oracle(2, 1, 2).unwrap();
        assert_eq!(pmf, BTreeMap::from([(1, 1.0)]));
    }

    #[test]
    fn length_three_by_hand() {
        // recount C_2 over all eight sequences directly
        let mut expected: BTreeMap<u64, f64> = BTreeMap::new();
        for i in 0..8u64 {
            let v = correlation_measure(&sequence_from_index(3, i), 2)
                .unwrap()
                .value;
            *expected.entry(v).or_insert(0.0) += 1.0 / 8.0;
        }
        let pmf = exact_distribution_oracle(3, 1, 2).unwrap();
        assert_eq!(pmf, expected);
        for p in pmf.values() {
            assert_eq!((p * 8.0).fract(), 0.0);
        }
    }

    #[test]
    fn pairs_sum_to_one() {
        let pmf = exact_distribution_oracle(3, 2, 2).unwrap();
        let total: f64 = pmf.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for p in pmf.values() {
            assert!((p * 28.0 - (p * 28.0).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_limits() {
        assert!(matches!(
            exact_distribution_oracle(13, 1, 2),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            exact_distribution_oracle(12, 3, 2),
            Err(Error::InstanceTooLarge(_))
        ));
        assert!(matches!(
            exact_distribution_oracle(2, 5, 2),
            Err(Error::FamilyTooLarge { .. })
        ));
        assert!(exact_distribution_oracle(3, 1, 4).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        let mut c = vec![0, 1];
        let mut n = 1;
        while next_combination(&mut c, 5) {
            n += 1;
        }
        assert_eq!(n, 10);
        assert_eq!(c, vec![3, 4]);
    }

    #[test]
    fn tv_distance() {
        let p = BTreeMap::from([(1, 0.5), (2, 0.5)]);
        let q = BTreeMap::from([(2, 0.25), (3, 0.75)]);
        assert!((total_variation(&p, &q) - 0.75).abs() < 1e-15);
        assert_eq!(total_variation(&p, &p), 0.0);
        assert_eq!(
            empirical_pmf([1, 1, 2, 3]),
            BTreeMap::from([(1, 0.5), (2, 0.25), (3, 0.25)])
        );
    }

    #[test]
    fn two_fair_coins() {
        let r = collision_experiment(1, 2, 10_000, 11).unwrap();
        assert!((r.empirical - 0.5).abs() < 0.02, "{r:?}");
        assert_eq!(r.formula, 0.5);
    }

    #[test]
    fn single_seed_never_collides() {
        let r = collision_experiment(5, 1, 100, 0).unwrap();
        assert_eq!(r.empirical, 1.0);
        assert_eq!(r.collision_free, 100);
    }

    #[test]
    fn birthday_grid_within_three_se() {
        for (n, s) in [(8usize, 10u64), (10, 30), (12, 64)] {
            let r = collision_experiment(n, s, 10_000, 5).unwrap();
            assert!(
                (r.empirical - r.formula).abs() <= 3.0 * r.std_error,
                "{r:?}"
            );
        }
    }
}
