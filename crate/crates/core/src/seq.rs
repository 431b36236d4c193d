//! Binary sequences over `{−1,+1}`, families, generator samples, text I/O,
//! and seeded sampling.
//!
//! A [`BinarySequence`] is bit-packed into `u64` words, least significant bit
//! first. Bit `1` encodes the symbol `−1` and bit `0` encodes `+1`, so the
//! product of symbols is the XOR of their bits. Bits past the end of the
//! sequence are always zero, which keeps derived equality and hashing exact.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

pub(crate) fn word_count(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A length-`N` vector over `{−1,+1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinarySequence {
    len: usize,
    words: Vec<u64>,
}

impl BinarySequence {
    /// Builds a sequence from `±1` symbols.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut words = vec![0u64; word_count(signs.len())];
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => words[i / WORD_BITS] |= 1 << (i % WORD_BITS),
                other => {
                    return Err(Error::param(format!(
                        "symbol {other} at index {i} is not ±1"
                    )))
                }
            }
        }
        Ok(Self {
            len: signs.len(),
            words,
        })
    }

    /// Builds a sequence from packed words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        let needed = word_count(len);
        if words.len() < needed {
            return Err(Error::LengthMismatch {
                expected: needed,
                found: words.len(),
            });
        }
        words.truncate(needed);
        let tail = len % WORD_BITS;
        if tail != 0 {
            words[needed - 1] &= (1u64 << tail) - 1;
        }
        Ok(Self { len, words })
    }

    /// The constant `+1` sequence.
    pub fn all_ones(len: usize) -> Result<Self> {
        Self::from_words(len, vec![0; word_count(len)])
    }

    /// `(+1, −1, +1, −1, …)`.
    pub fn alternating(len: usize) -> Result<Self> {
        Self::from_words(len, vec![0xAAAA_AAAA_AAAA_AAAA; word_count(len)])
    }

    /// Uniformly random sequence of length `len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        let words = (0..word_count(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; sequences have at least one symbol.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Raw bit at 0-based index `i` (`true` means `−1`).
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    /// Symbol at 0-based index `i`.
    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        if self.bit(i) {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// The sequence `−E`.
    pub fn negated(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        Self::from_words(self.len, words).expect("length preserved")
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.bit(i) { '-' } else { '+' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinarySequence({self})")
    }
}

impl FromStr for BinarySequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Alphabet {
    Signs,
    Digits,
}

/// Parses `+`/`-` or `1`/`0` text (one alphabet per sequence).
///
/// `+` and `1` map to `+1`; `-` and `0` map to `−1`. Error positions are
/// 1-based.
pub fn parse_sequence(text: &str) -> Result<BinarySequence> {
    if text.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut alphabet = None;
    let mut signs = Vec::with_capacity(text.len());
    for (i, ch) in text.chars().enumerate() {
        let position = i + 1;
        let (this, sign) = match ch {
            '+' => (Alphabet::Signs, 1),
            '-' => (Alphabet::Signs, -1),
            '1' => (Alphabet::Digits, 1),
            '0' => (Alphabet::Digits, -1),
            _ => return Err(Error::InvalidCharacter { ch, position }),
        };
        match alphabet {
            None => alphabet = Some(this),
            Some(a) if a != this => return Err(Error::MixedAlphabet { position }),
            Some(_) => {}
        }
        signs.push(sign);
    }
    BinarySequence::from_signs(&signs)
}

/// Parses a sequence file: one sequence per line, blank lines and lines
/// starting with `#` skipped.
pub fn parse_sequence_file(text: &str) -> Result<Vec<BinarySequence>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let seq = parse_sequence(line).map_err(|e| Error::Line {
            line: idx + 1,
            source: Box::new(e),
        })?;
        out.push(seq);
    }
    Ok(out)
}

/// Canonical `+`/`-` file text, newline-terminated lines.
pub fn format_sequence_file<'a, I>(seqs: I) -> String
where
    I: IntoIterator<Item = &'a BinarySequence>,
{
    let mut out = String::new();
    for s in seqs {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

/// A set of pairwise distinct sequences of common length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceFamily {
    length: usize,
    members: Vec<BinarySequence>,
}

impl SequenceFamily {
    pub fn new(members: Vec<BinarySequence>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::param("family must have at least one member"))?;
        let mut family = Self {
            length: first.len(),
            members: Vec::with_capacity(members.len()),
        };
        for m in members {
            family.insert(m)?;
        }
        Ok(family)
    }

    pub fn singleton(seq: BinarySequence) -> Self {
        Self {
            length: seq.len(),
            members: vec![seq],
        }
    }

    pub fn insert(&mut self, seq: BinarySequence) -> Result<()> {
        if seq.len() != self.length {
            return Err(Error::LengthMismatch {
                expected: self.length,
                found: seq.len(),
            });
        }
        if self.members.contains(&seq) {
            return Err(Error::DuplicateMember);
        }
        self.members.push(seq);
        Ok(())
    }

    /// Common sequence length `N`.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of members `|F|`.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[BinarySequence] {
        &self.members
    }

    pub fn contains(&self, seq: &BinarySequence) -> bool {
        self.members.contains(seq)
    }

    /// Copy with member `index` replaced, keeping the distinctness invariant.
    pub fn with_replaced(&self, index: usize, seq: BinarySequence) -> Result<Self> {
        let mut members = self.members.clone();
        if index >= members.len() {
            return Err(Error::param(format!("member index {index} out of range")));
        }
        members[index] = seq;
        Self::new(members)
    }
}

/// A seed-indexed list of sequences; distinct seeds may share an image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSample {
    length: usize,
    entries: Vec<(u64, BinarySequence)>,
}

impl GeneratorSample {
    pub fn new(entries: Vec<(u64, BinarySequence)>) -> Result<Self> {
        let length = entries
            .first()
            .map(|(_, s)| s.len())
            .ok_or_else(|| Error::param("generator needs at least one seed"))?;
        let mut seen = HashSet::with_capacity(entries.len());
        for (seed, img) in &entries {
            if img.len() != length {
                return Err(Error::LengthMismatch {
                    expected: length,
                    found: img.len(),
                });
            }
            if !seen.insert(*seed) {
                return Err(Error::DuplicateSeed(*seed));
            }
        }
        Ok(Self { length, entries })
    }

    /// Seeds `0, 1, …` assigned in order.
    pub fn from_images(images: Vec<BinarySequence>) -> Result<Self> {
        Self::new((0u64..).zip(images).collect())
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn seed_count(&self) -> usize {
        self.entries.len()
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn images(&self) -> impl Iterator<Item = &BinarySequence> + '_ {
        self.entries.iter().map(|(_, e)| e)
    }

    pub fn image(&self, seed: u64) -> Option<&BinarySequence> {
        self.entries
            .iter()
            .find(|(s, _)| *s == seed)
            .map(|(_, e)| e)
    }

    pub fn entries(&self) -> &[(u64, BinarySequence)] {
        &self.entries
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.entries.len());
        self.images().all(|img| seen.insert(img))
    }

    /// The image family `F(G)`, or `None` when two seeds collide.
    pub fn image_family(&self) -> Option<SequenceFamily> {
        SequenceFamily::new(self.images().cloned().collect()).ok()
    }
}

/// Counter-based seeded randomness: one master seed, independently
/// addressable streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// ChaCha8 keyed by the master seed, positioned on stream `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(index);
        rng
    }

    /// A child stream family, for nesting (trial → estimator chunks).
    pub fn derive(&self, index: u64) -> SeedStream {
        SeedStream::new(self.rng(index).random())
    }
}

fn check_family_size(length: usize, size: u64) -> Result<()> {
    let fits = if length < 63 {
        size <= 1u64 << length
    } else {
        size <= 1u64 << 62
    };
    if fits {
        Ok(())
    } else {
        Err(Error::FamilyTooLarge { length, size })
    }
}

/// Uniform random family of `size` distinct sequences of length `length`.
///
/// Draws iid uniform sequences and discards repeats, which is exactly
/// uniform over size-`size` subsets.
pub fn sample_family<R: Rng + ?Sized>(
    length: usize,
    size: usize,
    rng: &mut R,
) -> Result<SequenceFamily> {
    if length == 0 {
        return Err(Error::param("length must be positive"));
    }
    if size == 0 {
        return Err(Error::param("family size must be positive"));
    }
    check_family_size(length, size as u64)?;
    let mut seen = HashSet::with_capacity(size);
    let mut members = Vec::with_capacity(size);
    while members.len() < size {
        let s = BinarySequence::random(length, rng)?;
        if seen.insert(s.clone()) {
            members.push(s);
        }
    }
    Ok(SequenceFamily { length, members })
}

/// Random generator: `seed_count` iid uniform images, collisions kept.
pub fn sample_generator<R: Rng + ?Sized>(
    length: usize,
    seed_count: usize,
    rng: &mut R,
) -> Result<GeneratorSample> {
    if length == 0 {
        return Err(Error::param("length must be positive"));
    }
    if seed_count == 0 {
        return Err(Error::param("seed count must be positive"));
    }
    let images = (0..seed_count)
        .map(|_| BinarySequence::random(length, rng))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSample::from_images(images)
}
