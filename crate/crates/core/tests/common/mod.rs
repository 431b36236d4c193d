#![allow(dead_code)]

use crosscorr::{BinarySequence, SequenceFamily};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Brute force over ordered tuples of slots with repetition, nondecreasing
/// shifts and every window. A slot repeated in the tuple needs distinct
/// shifts; `distinct_content` extends that rule to slots with equal content.
pub fn naive_max(seqs: &[Vec<i8>], k: usize, distinct_content: bool) -> u64 {
    let n = seqs[0].len();
    let f = seqs.len();
    let mut best = 0u64;
    let mut members = vec![0usize; k];
    loop {
        let mut shifts = vec![0usize; k];
        loop {
            if admissible(seqs, &members, &shifts, distinct_content) {
                let last = shifts[k - 1];
                let mut v: i64 = 0;
                for i in 0..n - last {
                    let mut p = 1i64;
                    for j in 0..k {
                        p *= seqs[members[j]][i + shifts[j]] as i64;
                    }
                    v += p;
                    best = best.max(v.unsigned_abs());
                }
            }
            if !next_nondecreasing(&mut shifts, n) {
                break;
            }
        }
        if !next_tuple(&mut members, f) {
            break;
        }
    }
    best
}

fn admissible(seqs: &[Vec<i8>], members: &[usize], shifts: &[usize], content: bool) -> bool {
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let same =
                members[a] == members[b] || (content && seqs[members[a]] == seqs[members[b]]);
            if same && shifts[a] == shifts[b] {
                return false;
            }
        }
    }
    true
}

fn next_tuple(t: &mut [usize], base: usize) -> bool {
    for x in t.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

fn next_nondecreasing(d: &mut [usize], n: usize) -> bool {
    for i in (0..d.len()).rev() {
        if d[i] + 1 < n {
            d[i] += 1;
            for j in i + 1..d.len() {
                d[j] = d[i];
            }
            return true;
        }
    }
    false
}

pub fn signs(seqs: &[BinarySequence]) -> Vec<Vec<i8>> {
    seqs.iter().map(|s| s.signs()).collect()
}

pub fn naive_phi(family: &SequenceFamily, k: usize) -> u64 {
    naive_max(&signs(family.members()), k, false)
}

pub fn naive_c(seq: &BinarySequence, k: usize) -> u64 {
    naive_max(&[seq.signs()], k, false)
}

/// C̃ by brute force: the tuple is fixed, only shifts and windows vary.
pub fn naive_c_tilde(seqs: &[Vec<i8>]) -> u64 {
    let k = seqs.len();
    let n = seqs[0].len();
    let members: Vec<usize> = (0..k).collect();
    let mut shifts = vec![0usize; k];
    let mut best = 0u64;
    loop {
        if admissible(seqs, &members, &shifts, true) {
            let mut v: i64 = 0;
            for i in 0..n - shifts[k - 1] {
                v += (0..k)
                    .map(|j| seqs[j][i + shifts[j]] as i64)
                    .product::<i64>();
                best = best.max(v.unsigned_abs());
            }
        }
        if !next_nondecreasing(&mut shifts, n) {
            break;
        }
    }
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_family(rng: &mut impl Rng, length: usize, size: usize) -> SequenceFamily {
    crosscorr::sample_family(length, size, rng).expect("feasible family")
}

pub fn bin() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_BIN_EXE_crosscorr"))
}
