//! Pseudorandomness measures for finite binary sequences and families of
//! sequences.
//!
//! The crate computes the correlation measure `C_k` of a single sequence,
//! the cross-correlation measure `Φ_k` of a family, and its generator
//! variant `Φ̃_k` exactly, using bit-packed sequences and word-parallel
//! prefix scans. Around the measures sit the binomial tail machinery that
//! governs their typical sizes ([`tailmath`]) and a seeded Monte Carlo
//! harness that compares sampled measures with the typical-value bands
//! ([`experiments`]).
//!
//! Symbols are stored as bits with `1 ↔ −1` and `0 ↔ +1`, so products of
//! entries become XORs and every shifted-product sum `V` equals
//! `M − 2·popcount`.

pub mod error;
pub mod experiments;
pub mod measures;
pub mod seq;
pub mod tailmath;

pub use error::{Error, Result};
pub use measures::{
    correlation_measure, correlation_v, count_windows, cross_correlation_k_tuple, estimate_phi,
    estimate_phi_tilde, phi, phi_tilde, EnumOptions, MeasureResult, ShiftPattern, WindowCount,
};
pub use seq::{
    parse_sequence, parse_sequence_file, sample_family, sample_generator, BinarySequence,
    GeneratorSample, SeedStream, SequenceFamily,
};
