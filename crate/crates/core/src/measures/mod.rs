//! Correlation measures of binary sequences.
//!
//! For sequences `E⁽¹⁾ … E⁽ᵏ⁾` of length `N`, shifts `D = (d_1 ≤ … ≤ d_k)`
//! and a window `M` with `1 ≤ M` and `M + d_k ≤ N`,
//!
//! ```text
//! V(M, D) = Σ_{n=1..M} e⁽¹⁾_{n+d_1} · … · e⁽ᵏ⁾_{n+d_k}
//! ```
//!
//! Every measure here is a maximum of `|V|`:
//!
//! * [`correlation_measure`]: one sequence, strictly increasing `D` (`C_k`).
//! * [`cross_correlation_k_tuple`]: a fixed ordered tuple; equal sequences
//!   may not share a shift (`C̃_k`).
//! * [`phi`]: all `k`-tuples drawn from a family, with repetition (`Φ_k`).
//! * [`phi_tilde`]: blocks of strictly increasing shifts on distinct seeds
//!   of a generator (`Φ̃_k`).
//!
//! All maxima come with a witness. Among maximizers the witness is the
//! smallest by member indices, then shifts, then window length, so results
//! do not depend on thread scheduling.

mod kernel;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::{word_count, BinarySequence, GeneratorSample, SeedStream, SequenceFamily};
use kernel::{best_window, extract_bits, prefix_sum};
use search::{Candidate, ShiftBank};

/// Window length `M` plus a shift per tuple position.
///
/// `members[i]` indexes the sequence at tuple position `i` (family member,
/// generator entry, or tuple position, depending on the measure). Shifts are
/// nondecreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPattern {
    pub members: Vec<usize>,
    pub shifts: Vec<usize>,
    pub window: usize,
}

impl ShiftPattern {
    pub fn order(&self) -> usize {
        self.shifts.len()
    }

    /// Shifts grouped by member, `(member, strictly increasing shifts)`,
    /// in order of first appearance.
    pub fn blocks(&self) -> Vec<(usize, Vec<usize>)> {
        let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
        for (&m, &d) in self.members.iter().zip(&self.shifts) {
            match blocks.iter_mut().find(|(b, _)| *b == m) {
                Some((_, ds)) => ds.push(d),
                None => blocks.push((m, vec![d])),
            }
        }
        blocks
    }

    /// Re-evaluates `V` at this pattern against the indexed sequences.
    pub fn evaluate(&self, seqs: &[BinarySequence]) -> Result<i64> {
        let tuple = self
            .members
            .iter()
            .map(|&m| {
                seqs.get(m)
                    .ok_or_else(|| Error::param(format!("member index {m} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        correlation_v(&tuple, &self.shifts, self.window)
    }
}

/// A measure value with its argmax witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: u64,
    pub witness: ShiftPattern,
    /// Number of (tuple, shift) configurations scanned; each scan covers all
    /// windows.
    pub evaluated: u64,
}

/// Knobs for exact enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Refuse instances with more configurations than this; `None` disables.
    pub budget: Option<u64>,
}

pub const DEFAULT_BUDGET: u64 = 10_000_000_000;

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            budget: Some(DEFAULT_BUDGET),
        }
    }
}

impl EnumOptions {
    pub fn with_budget(budget: u64) -> Self {
        Self {
            budget: Some(budget),
        }
    }

    pub fn unlimited() -> Self {
        Self { budget: None }
    }

    fn check(&self, count: WindowCount) -> Result<()> {
        match self.budget {
            Some(budget) if count.saturated || count.count > budget => Err(Error::BudgetExceeded {
                count: count.count,
                budget,
            }),
            _ => Ok(()),
        }
    }
}

/// Configuration count, saturating at `u64::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCount {
    pub count: u64,
    pub saturated: bool,
}

fn check_admissible(n: usize, shifts: &[usize], window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::Inadmissible("window must be at least 1".into()));
    }
    if shifts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Inadmissible("shifts must be nondecreasing".into()));
    }
    let last = *shifts.last().expect("checked nonempty");
    if window + last > n {
        return Err(Error::Inadmissible(format!(
            "window {window} + shift {last} exceeds length {n}"
        )));
    }
    Ok(())
}

fn common_length(seqs: &[&BinarySequence]) -> Result<usize> {
    let n = seqs
        .first()
        .ok_or_else(|| Error::param("empty sequence tuple"))?
        .len();
    if let Some(bad) = seqs.iter().find(|s| s.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(n)
}

/// Exact `V(seqs, M, D)`.
///
/// Requires `D` nondecreasing, `M ≥ 1` and `M + d_k ≤ N`.
pub fn correlation_v(seqs: &[&BinarySequence], shifts: &[usize], window: usize) -> Result<i64> {
    if seqs.len() != shifts.len() {
        return Err(Error::param(format!(
            "{} sequences but {} shifts",
            seqs.len(),
            shifts.len()
        )));
    }
    let n = common_length(seqs)?;
    check_admissible(n, shifts, window)?;
    let words = word_count(window);
    let mut acc = vec![0u64; words];
    let mut buf = vec![0u64; words];
    for (seq, &d) in seqs.iter().zip(shifts) {
        extract_bits(seq.words(), d, window, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a ^= b;
        }
    }
    Ok(prefix_sum(&acc, window))
}

fn to_result(bank: &ShiftBank, best: Candidate, evaluated: u64) -> MeasureResult {
    MeasureResult {
        value: best.value as u64,
        witness: ShiftPattern {
            members: best.items.iter().map(|&i| bank.member_of(i)).collect(),
            shifts: best.items.iter().map(|&i| bank.shift_of(i)).collect(),
            window: best.window as usize,
        },
        evaluated,
    }
}

fn check_order(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::param(format!("order k = {k} must be at least 2")));
    }
    Ok(())
}

/// Max of `|V|` over all `k`-subsets of `(shift, member)` items.
fn exact_max(seqs: &[&BinarySequence], k: usize, opts: &EnumOptions) -> Result<MeasureResult> {
    check_order(k)?;
    let n = common_length(seqs)?;
    opts.check(count_windows(n, k, seqs.len())?)?;
    let bank = ShiftBank::new(seqs);
    match search::exhaustive(&bank, k) {
        (Some(best), evaluated) => Ok(to_result(&bank, best, evaluated)),
        (None, _) => Err(Error::NoAdmissiblePattern),
    }
}

/// Correlation measure of order `k`, `2 ≤ k ≤ N`.
pub fn correlation_measure(seq: &BinarySequence, k: usize) -> Result<MeasureResult> {
    correlation_measure_with(seq, k, &EnumOptions::default())
}

pub fn correlation_measure_with(
    seq: &BinarySequence,
    k: usize,
    opts: &EnumOptions,
) -> Result<MeasureResult> {
    check_order(k)?;
    if k > seq.len() {
        return Err(Error::param(format!(
            "order k = {k} exceeds length {}",
            seq.len()
        )));
    }
    exact_max(&[seq], k, opts)
}

/// Maximum of `|V|` for one ordered tuple over nondecreasing `D` and all
/// admissible `M`, where positions holding equal sequences get distinct
/// shifts. Witness members are tuple positions.
pub fn cross_correlation_k_tuple(seqs: &[&BinarySequence], k: usize) -> Result<MeasureResult> {
    check_order(k)?;
    if seqs.len() != k {
        return Err(Error::param(format!(
            "tuple has {} sequences, order is {k}",
            seqs.len()
        )));
    }
    let n = common_length(seqs)?;
    // equal_before[i]: earlier positions holding the same content as i
    let equal_before: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..i).filter(|&j| seqs[j] == seqs[i]).collect())
        .collect();
    let words = word_count(n);
    let shifted: Vec<Vec<Vec<u64>>> = seqs
        .iter()
        .map(|s| {
            (0..n)
                .map(|d| {
                    let mut row = vec![0u64; words];
                    extract_bits(s.words(), d, n - d, &mut row);
                    row
                })
                .collect()
        })
        .collect();

    struct Tuple<'a> {
        n: usize,
        k: usize,
        equal_before: &'a [Vec<usize>],
        shifted: &'a [Vec<Vec<u64>>],
        shifts: Vec<usize>,
        acc: Vec<Vec<u64>>,
        best: Option<(u32, Vec<usize>, u32)>,
        evaluated: u64,
    }

    impl Tuple<'_> {
        // Lexicographic D order plus strict improvement keeps the smallest
        // maximizing D and, within it, the smallest M.
        fn go(&mut self, pos: usize) {
            let lo = if pos == 0 { 0 } else { self.shifts[pos - 1] };
            for d in lo..self.n {
                if self.equal_before[pos].iter().any(|&j| self.shifts[j] == d) {
                    continue;
                }
                self.shifts[pos] = d;
                let row = &self.shifted[pos][d];
                let len = self.n - d;
                if pos + 1 == self.k {
                    let acc = if pos == 0 {
                        None
                    } else {
                        Some(&self.acc[pos - 1])
                    };
                    let (v, m) = best_window(len, |w| acc.map_or(0, |a| a[w]) ^ row[w]);
                    self.evaluated += 1;
                    if self.best.as_ref().is_none_or(|b| v > b.0) {
                        self.best = Some((v, self.shifts.clone(), m));
                    }
                } else {
                    let words = word_count(len);
                    let (done, rest) = self.acc.split_at_mut(pos);
                    for (w, (out, r)) in rest[0].iter_mut().zip(row).take(words).enumerate() {
                        *out = done.last().map_or(0, |prev| prev[w]) ^ r;
                    }
                    self.go(pos + 1);
                }
            }
        }
    }

    let mut t = Tuple {
        n,
        k,
        equal_before: &equal_before,
        shifted: &shifted,
        shifts: vec![0; k],
        acc: vec![vec![0u64; words]; k],
        best: None,
        evaluated: 0,
    };
    t.go(0);
    let (value, shifts, window) = t.best.ok_or(Error::NoAdmissiblePattern)?;
    Ok(MeasureResult {
        value: value as u64,
        witness: ShiftPattern {
            members: (0..k).collect(),
            shifts,
            window: window as usize,
        },
        evaluated: t.evaluated,
    })
}

/// Cross-correlation measure of order `k` of a family.
pub fn phi(family: &SequenceFamily, k: usize) -> Result<MeasureResult> {
    phi_with(family, k, &EnumOptions::default())
}

pub fn phi_with(family: &SequenceFamily, k: usize, opts: &EnumOptions) -> Result<MeasureResult> {
    let seqs: Vec<&BinarySequence> = family.members().iter().collect();
    exact_max(&seqs, k, opts)
}

/// Cross-correlation measure of order `k` of a generator. Witness members
/// index the generator's entries.
///
/// For `k = 2` a colliding pair gives the maximum `N` directly (`D = (0,0)`,
/// `M = N`); the reported pair is the first one in witness order, which is
/// also what the exhaustive search would return.
pub fn phi_tilde(gen: &GeneratorSample, k: usize) -> Result<MeasureResult> {
    phi_tilde_with(gen, k, &EnumOptions::default())
}

pub fn phi_tilde_with(
    gen: &GeneratorSample,
    k: usize,
    opts: &EnumOptions,
) -> Result<MeasureResult> {
    check_order(k)?;
    let images: Vec<&BinarySequence> = gen.images().collect();
    if k == 2 && !gen.is_injective() {
        let n = gen.length();
        for i in 0..images.len() {
            let neg = images[i].negated();
            if let Some(j) =
                (i + 1..images.len()).find(|&j| *images[j] == *images[i] || *images[j] == neg)
            {
                return Ok(MeasureResult {
                    value: n as u64,
                    witness: ShiftPattern {
                        members: vec![i, j],
                        shifts: vec![0, 0],
                        window: n,
                    },
                    evaluated: 1,
                });
            }
        }
    }
    exact_max(&images, k, opts)
}

/// Randomized lower bound on `phi`: the best of `trials` uniformly sampled
/// configurations, each with its best window.
pub fn estimate_phi(
    family: &SequenceFamily,
    k: usize,
    trials: u64,
    streams: &SeedStream,
) -> Result<MeasureResult> {
    let seqs: Vec<&BinarySequence> = family.members().iter().collect();
    sampled_max(&seqs, k, trials, streams)
}

/// Randomized lower bound on `phi_tilde`, sampling over generator entries.
pub fn estimate_phi_tilde(
    gen: &GeneratorSample,
    k: usize,
    trials: u64,
    streams: &SeedStream,
) -> Result<MeasureResult> {
    let seqs: Vec<&BinarySequence> = gen.images().collect();
    sampled_max(&seqs, k, trials, streams)
}

fn sampled_max(
    seqs: &[&BinarySequence],
    k: usize,
    trials: u64,
    streams: &SeedStream,
) -> Result<MeasureResult> {
    check_order(k)?;
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    common_length(seqs)?;
    let bank = ShiftBank::new(seqs);
    let best = search::sampled(&bank, k, trials, streams).ok_or(Error::NoAdmissiblePattern)?;
    Ok(to_result(&bank, best, trials))
}

/// Number of canonical configurations `phi` scans: `k`-subsets of the
/// `N·|F|` items `(shift, member)`, i.e. `C(N·|F|, k)`.
pub fn count_windows(length: usize, k: usize, family_size: usize) -> Result<WindowCount> {
    check_order(k)?;
    if length == 0 || family_size == 0 {
        return Err(Error::param("length and family size must be positive"));
    }
    let Some(items) = (length as u64).checked_mul(family_size as u64) else {
        return Ok(WindowCount {
            count: u64::MAX,
            saturated: true,
        });
    };
    Ok(saturating_choose(items, k as u64))
}

fn saturating_choose(n: u64, k: u64) -> WindowCount {
    if k > n {
        return WindowCount {
            count: 0,
            saturated: false,
        };
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c = C(n, i) fits in u64 here, so the product fits in u128
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return WindowCount {
                count: u64::MAX,
                saturated: true,
            };
        }
    }
    WindowCount {
        count: c as u64,
        saturated: false,
    }
}
