use crate::config::CodeRate;

pub const CONSTRAINT_LENGTH: usize = 7;
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;
/// Generator polynomials in output order. The MSB taps the current input.
pub const GENERATORS: [u32; 2] = [0o133, 0o171];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeSpec {
    pub constraint_length: usize,
    pub generators: [u32; 2],
    pub rate: CodeRate,
}

impl CodeSpec {
    pub fn new(rate: CodeRate) -> Self {
        CodeSpec {
            constraint_length: CONSTRAINT_LENGTH,
            generators: GENERATORS,
            rate,
        }
    }
}

#[inline]
pub(crate) fn branch_output(window: u32) -> (u8, u8) {
    (
        ((window & GENERATORS[0]).count_ones() & 1) as u8,
        ((window & GENERATORS[1]).count_ones() & 1) as u8,
    )
}

/// Rate-1/2 encoding from the all-zero state, terminated with six zero tail
/// bits. Output is `2 * (bits.len() + 6)` bits, interleaved `(g0, g1)`.
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL_BITS));
    let mut state = 0u32;
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, TAIL_BITS)) {
        let window = (u32::from(b & 1) << 6) | state;
        let (a, c) = branch_output(window);
        out.push(a);
        out.push(c);
        state = window >> 1;
    }
    out
}
