//! Inner coding chain: convolutional code, puncturing, QAM mapping and the
//! Viterbi decoder.
//!
//! Soft values are LLRs with the convention `llr > 0` means bit 0 is more
//! likely. A zero LLR is an erasure.

mod conv;
mod interleave;
mod puncture;
mod qam;
mod viterbi;

pub use conv::{conv_encode, CodeSpec, CONSTRAINT_LENGTH, GENERATORS, TAIL_BITS};
pub use interleave::Interleaver;
pub use puncture::{depuncture, puncture, punctured_len, PuncturePattern};
pub use qam::{qam_demap, qam_map, Demapper, EqualizedSymbol};
pub use viterbi::{viterbi_decode, Viterbi};

/// Hard decisions from LLRs (`llr < 0` gives 1).
pub fn hard_decisions(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}
