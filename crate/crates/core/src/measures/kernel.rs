//! Word-level primitives: shifted bit extraction and the prefix-sum scan
//! that maximizes `|V(M)|` over all window lengths in one pass.

use crate::seq::{word_count, WORD_BITS};

/// Copies bits `offset .. offset + count` of `src` into `dst[..word_count(count)]`,
/// clearing bits past `count`.
pub(crate) fn extract_bits(src: &[u64], offset: usize, count: usize, dst: &mut [u64]) {
    let n_words = word_count(count);
    let first = offset / WORD_BITS;
    let sh = offset % WORD_BITS;
    for (w, out) in dst.iter_mut().enumerate().take(n_words) {
        let i = first + w;
        let lo = src.get(i).copied().unwrap_or(0);
        *out = if sh == 0 {
            lo
        } else {
            let hi = src.get(i + 1).copied().unwrap_or(0);
            (lo >> sh) | (hi << (WORD_BITS - sh))
        };
    }
    let tail = count % WORD_BITS;
    if tail != 0 && n_words > 0 {
        dst[n_words - 1] &= (1u64 << tail) - 1;
    }
}

/// Walk summary of one byte: bit 0 is a `+1` step, bit 1 a `−1` step,
/// least significant bit first. Arg positions are 1-based step counts.
#[derive(Clone, Copy)]
struct ByteWalk {
    total: i8,
    max: i8,
    argmax: u8,
    min: i8,
    argmin: u8,
}

const fn byte_walk(byte: u8) -> ByteWalk {
    let mut s: i8 = 0;
    let mut walk = ByteWalk {
        total: 0,
        max: i8::MIN,
        argmax: 0,
        min: i8::MAX,
        argmin: 0,
    };
    let mut i = 0;
    while i < 8 {
        s += if (byte >> i) & 1 == 1 { -1 } else { 1 };
        if s > walk.max {
            walk.max = s;
            walk.argmax = i as u8 + 1;
        }
        if s < walk.min {
            walk.min = s;
            walk.argmin = i as u8 + 1;
        }
        i += 1;
    }
    walk.total = s;
    walk
}

static BYTE_WALKS: [ByteWalk; 256] = {
    let mut table = [ByteWalk {
        total: 0,
        max: 0,
        argmax: 0,
        min: 0,
        argmin: 0,
    }; 256];
    let mut b = 0;
    while b < 256 {
        table[b] = byte_walk(b as u8);
        b += 1;
    }
    table
};

struct Scan {
    sum: i32,
    best: i32,
    best_at: u32,
}

impl Scan {
    #[inline(always)]
    fn byte(&mut self, byte: usize, base: u32) {
        let w = &BYTE_WALKS[byte];
        // Skip the candidate bookkeeping when this byte cannot beat `best`.
        if self.sum.abs() + 8 > self.best {
            let hi = self.sum + w.max as i32;
            let lo = self.sum + w.min as i32;
            let (a, b) = (hi.abs(), lo.abs());
            let (val, at) = if a > b {
                (a, base + w.argmax as u32)
            } else if b > a {
                (b, base + w.argmin as u32)
            } else {
                (a, base + (w.argmax.min(w.argmin)) as u32)
            };
            if val > self.best {
                self.best = val;
                self.best_at = at;
            }
        }
        self.sum += w.total as i32;
    }

    #[inline(always)]
    fn bit(&mut self, bit: bool, at: u32) {
        self.sum += if bit { -1 } else { 1 };
        if self.sum.abs() > self.best {
            self.best = self.sum.abs();
            self.best_at = at;
        }
    }
}

/// Maximum of `|V(M)| = |Σ_{n≤M} z_n|` over `M = 1..=len` for the walk whose
/// bits come from `word_at(w)`, with the smallest maximizing `M`.
///
/// Returns `(max |V|, M)`. `len` must be at least 1.
#[inline]
pub(crate) fn best_window(len: usize, mut word_at: impl FnMut(usize) -> u64) -> (u32, u32) {
    debug_assert!(len >= 1);
    let mut scan = Scan {
        sum: 0,
        best: 0,
        best_at: 0,
    };
    let full = len / WORD_BITS;
    for w in 0..full {
        let mut word = word_at(w);
        let base = (w * WORD_BITS) as u32;
        for b in 0..8u32 {
            scan.byte((word & 0xFF) as usize, base + 8 * b);
            word >>= 8;
        }
    }
    let tail = len % WORD_BITS;
    if tail != 0 {
        let mut word = word_at(full);
        let mut base = (full * WORD_BITS) as u32;
        for _ in 0..tail / 8 {
            scan.byte((word & 0xFF) as usize, base);
            word >>= 8;
            base += 8;
        }
        for _ in 0..tail % 8 {
            base += 1;
            scan.bit(word & 1 == 1, base);
            word >>= 1;
        }
    }
    (scan.best as u32, scan.best_at)
}

/// `V(M) = M − 2·popcount(first M bits)`.
pub(crate) fn prefix_sum(words: &[u64], m: usize) -> i64 {
    let full = m / WORD_BITS;
    let mut ones: u64 = words[..full].iter().map(|w| w.count_ones() as u64).sum();
    let tail = m % WORD_BITS;
    if tail != 0 {
        ones += (words[full] & ((1u64 << tail) - 1)).count_ones() as u64;
    }
    m as i64 - 2 * ones as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_best(bits: &[bool]) -> (u32, u32) {
        let mut s = 0i32;
        let mut best = (0u32, 0u32);
        for (i, &b) in bits.iter().enumerate() {
            s += if b { -1 } else { 1 };
            if s.unsigned_abs() > best.0 {
                best = (s.unsigned_abs(), i as u32 + 1);
            }
        }
        best
    }

    fn pack(bits: &[bool]) -> Vec<u64> {
        let mut w = vec![0u64; word_count(bits.len()).max(1)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                w[i / 64] |= 1 << (i % 64);
            }
        }
        w
    }

    #[test]
    fn byte_table_spot_checks() {
        let w = BYTE_WALKS[0];
        assert_eq!((w.total, w.max, w.argmax, w.min, w.argmin), (8, 8, 8, 1, 1));
        let w = BYTE_WALKS[0xFF];
        assert_eq!(
            (w.total, w.max, w.argmax, w.min, w.argmin),
            (-8, -1, 1, -8, 8)
        );
        // + - + - ... : walk 1,0,1,0,...
        let w = BYTE_WALKS[0xAA];
        assert_eq!((w.total, w.max, w.argmax, w.min, w.argmin), (0, 1, 1, 0, 2));
    }

    #[test]
    fn extract_unaligned() {
        let src = [0xF0F0_F0F0_F0F0_F0F0u64, 0x1];
        let mut dst = [0u64; 2];
        extract_bits(&src, 4, 64, &mut dst);
        assert_eq!(dst[0], 0x1F0F_0F0F_0F0F_0F0F);
        extract_bits(&src, 60, 5, &mut dst);
        assert_eq!(dst[0], 0b11111);
    }

    proptest! {
        #[test]
        fn scan_matches_naive(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let words = pack(&bits);
            prop_assert_eq!(best_window(bits.len(), |w| words[w]), naive_best(&bits));
        }

        #[test]
        fn extract_matches_bitwise(bits in proptest::collection::vec(any::<bool>(), 1..300), off in 0usize..300) {
            let off = off % bits.len();
            let count = bits.len() - off;
            let src = pack(&bits);
            let mut dst = vec![0u64; word_count(count)];
            extract_bits(&src, off, count, &mut dst);
            prop_assert_eq!(dst, pack(&bits[off..]));
        }
    }
}
