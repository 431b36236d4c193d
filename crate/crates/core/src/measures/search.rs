//! Exhaustive and sampled search over canonical shift configurations.
//!
//! A configuration is a set of `k` distinct items `(shift, member)`. Items are
//! numbered `shift * members + member`, so a sorted item list has
//! nondecreasing shifts and the product of the shifted members is
//! independent of how an ordered tuple would list them. Two equal members
//! never share a shift because items in a set are distinct.

use std::cmp::Ordering;

use rand::seq::index;
use rayon::prelude::*;

use super::kernel::{best_window, extract_bits};
use crate::seq::{word_count, BinarySequence, SeedStream};

/// Every member pre-shifted by every admissible shift.
pub(crate) struct ShiftBank {
    length: usize,
    members: usize,
    words: usize,
    data: Vec<u64>,
}

impl ShiftBank {
    pub(crate) fn new(seqs: &[&BinarySequence]) -> Self {
        let length = seqs[0].len();
        let members = seqs.len();
        let words = word_count(length);
        let mut data = vec![0u64; length * members * words];
        for shift in 0..length {
            for (m, seq) in seqs.iter().enumerate() {
                let at = (shift * members + m) * words;
                extract_bits(
                    seq.words(),
                    shift,
                    length - shift,
                    &mut data[at..at + words],
                );
            }
        }
        Self {
            length,
            members,
            words,
            data,
        }
    }

    pub(crate) fn items(&self) -> usize {
        self.length * self.members
    }

    #[inline]
    pub(crate) fn shift_of(&self, item: usize) -> usize {
        item / self.members
    }

    #[inline]
    pub(crate) fn member_of(&self, item: usize) -> usize {
        item % self.members
    }

    #[inline]
    fn row(&self, item: usize) -> &[u64] {
        &self.data[item * self.words..(item + 1) * self.words]
    }
}

/// Best configuration found so far: value, sorted items, window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Candidate {
    pub value: u32,
    pub items: Vec<usize>,
    pub window: u32,
}

/// Witness order: member indices, then shifts, then window.
fn key_cmp(bank: &ShiftBank, a: &[usize], a_win: u32, b: &[usize], b_win: u32) -> Ordering {
    let members = a
        .iter()
        .map(|&i| bank.member_of(i))
        .cmp(b.iter().map(|&i| bank.member_of(i)));
    members
        .then_with(|| {
            a.iter()
                .map(|&i| bank.shift_of(i))
                .cmp(b.iter().map(|&i| bank.shift_of(i)))
        })
        .then(a_win.cmp(&b_win))
}

/// Larger value wins; ties go to the smaller witness key.
pub(crate) fn better(bank: &ShiftBank, a: Candidate, b: Candidate) -> Candidate {
    match a.value.cmp(&b.value) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if key_cmp(bank, &b.items, b.window, &a.items, a.window) == Ordering::Less {
                b
            } else {
                a
            }
        }
    }
}

fn better_opt(bank: &ShiftBank, a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(a), Some(b)) => Some(better(bank, a, b)),
        (a, None) => a,
        (None, b) => b,
    }
}

struct Walker<'a> {
    bank: &'a ShiftBank,
    k: usize,
    items: Vec<usize>,
    acc: Vec<Vec<u64>>,
    best: Option<Candidate>,
    evaluated: u64,
}

impl Walker<'_> {
    fn offer(&mut self, value: u32, window: u32) {
        let replace = match &self.best {
            None => true,
            Some(b) => {
                value > b.value
                    || (value == b.value
                        && key_cmp(self.bank, &self.items, window, &b.items, b.window)
                            == Ordering::Less)
            }
        };
        if replace {
            match &mut self.best {
                Some(b) => {
                    b.value = value;
                    b.window = window;
                    b.items.clone_from(&self.items);
                }
                None => {
                    self.best = Some(Candidate {
                        value,
                        items: self.items.clone(),
                        window,
                    })
                }
            }
        }
    }

    /// Items `0..depth` are chosen and `acc[depth - 1]` holds their XOR.
    fn descend(&mut self, depth: usize) {
        let bank = self.bank;
        let total = bank.items();
        let start = self.items[depth - 1] + 1;
        let remaining = self.k - depth;
        if remaining == 1 {
            for item in start..total {
                let len = bank.length - bank.shift_of(item);
                let (acc, row) = (&self.acc[depth - 1], bank.row(item));
                let (value, window) = best_window(len, |w| acc[w] ^ row[w]);
                self.evaluated += 1;
                self.items[depth] = item;
                self.offer(value, window);
            }
            return;
        }
        // leave room for the remaining items
        for item in start..total.saturating_sub(remaining - 1) {
            let words = word_count(bank.length - bank.shift_of(item));
            let (lower, upper) = self.acc.split_at_mut(depth);
            let prev = &lower[depth - 1];
            let row = bank.row(item);
            for w in 0..words {
                upper[0][w] = prev[w] ^ row[w];
            }
            self.items[depth] = item;
            self.descend(depth + 1);
        }
    }
}

/// Exhaustive maximum over all `k`-subsets of items; parallel over the first
/// item. Returns the best candidate and the number of configurations
/// evaluated.
pub(crate) fn exhaustive(bank: &ShiftBank, k: usize) -> (Option<Candidate>, u64) {
    debug_assert!(k >= 2);
    let total = bank.items();
    if total < k {
        return (None, 0);
    }
    (0..=total - k)
        .into_par_iter()
        .map(|first| {
            let mut walker = Walker {
                bank,
                k,
                items: vec![0; k],
                acc: vec![vec![0u64; bank.words]; k - 1],
                best: None,
                evaluated: 0,
            };
            walker.items[0] = first;
            walker.acc[0].copy_from_slice(bank.row(first));
            walker.descend(1);
            (walker.best, walker.evaluated)
        })
        .reduce(
            || (None, 0),
            |(a, na), (b, nb)| (better_opt(bank, a, b), na + nb),
        )
}

/// Value and best window of one sorted item set.
pub(crate) fn evaluate_items(bank: &ShiftBank, items: &[usize]) -> (u32, u32) {
    let mut acc = vec![0u64; bank.words];
    for &item in items {
        for (a, r) in acc.iter_mut().zip(bank.row(item)) {
            *a ^= r;
        }
    }
    let last = *items.last().expect("nonempty configuration");
    best_window(bank.length - bank.shift_of(last), |w| acc[w])
}

const SAMPLE_CHUNK: u64 = 1024;

/// Maximum over `trials` uniformly sampled `k`-subsets. Chunk `c` of the
/// trials draws from stream `c`, so results do not depend on thread count.
pub(crate) fn sampled(
    bank: &ShiftBank,
    k: usize,
    trials: u64,
    streams: &SeedStream,
) -> Option<Candidate> {
    let total = bank.items();
    if total < k {
        return None;
    }
    let chunks = trials.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = streams.rng(c);
            let n = SAMPLE_CHUNK.min(trials - c * SAMPLE_CHUNK);
            let mut best: Option<Candidate> = None;
            for _ in 0..n {
                let mut items = index::sample(&mut rng, total, k).into_vec();
                items.sort_unstable();
                let (value, window) = evaluate_items(bank, &items);
                best = better_opt(
                    bank,
                    best,
                    Some(Candidate {
                        value,
                        items,
                        window,
                    }),
                );
            }
            best
        })
        .reduce(|| None, |a, b| better_opt(bank, a, b))
}
