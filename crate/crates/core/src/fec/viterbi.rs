//! Soft-decision Viterbi decoder for the 64-state terminated trellis.

use crate::error::{Error, Result};
use crate::fec::conv::{branch_output, TAIL_BITS};

const STATES: usize = 64;

/// Decoder with reusable scratch buffers. Not shared across threads during a
/// call; create one per worker.
#[derive(Debug, Clone)]
pub struct Viterbi {
    /// Sign pattern per trellis window: `(+-1, +-1)` for output bits `(0|1)`.
    signs: [(f64, f64); 2 * STATES],
    decisions: Vec<u64>,
}

impl Default for Viterbi {
    fn default() -> Self {
        Self::new()
    }
}

impl Viterbi {
    pub fn new() -> Self {
        let mut signs = [(0.0, 0.0); 2 * STATES];
        for (w, s) in signs.iter_mut().enumerate() {
            let (a, b) = branch_output(w as u32);
            *s = (1.0 - 2.0 * a as f64, 1.0 - 2.0 * b as f64);
        }
        Viterbi {
            signs,
            decisions: Vec::new(),
        }
    }

    /// Decodes a depunctured LLR stream (two per trellis step, tail
    /// included) and returns the information bits without the tail.
    pub fn decode(&mut self, llrs: &[f64]) -> Result<Vec<u8>> {
        if llrs.len() % 2 != 0 {
            return Err(Error::OddCodedLength(llrs.len()));
        }
        let steps = llrs.len() / 2;
        self.decisions.clear();
        self.decisions.reserve(steps);
        let mut metric = [f64::NEG_INFINITY; STATES];
        metric[0] = 0.0;
        let mut next = [0.0f64; STATES];
        for pair in llrs.chunks_exact(2) {
            let (l0, l1) = (pair[0], pair[1]);
            let mut bits = 0u64;
            for (ns, slot) in next.iter_mut().enumerate() {
                let input = ns >> 5;
                let base = (ns << 1) & (STATES - 1);
                let w0 = (input << 6) | base;
                let w1 = w0 | 1;
                let (a0, b0) = self.signs[w0];
                let (a1, b1) = self.signs[w1];
                let m0 = metric[base] + a0 * l0 + b0 * l1;
                let m1 = metric[base | 1] + a1 * l0 + b1 * l1;
                if m1 > m0 {
                    *slot = m1;
                    bits |= 1 << ns;
                } else {
                    *slot = m0;
                }
            }
            self.decisions.push(bits);
            std::mem::swap(&mut metric, &mut next);
            // keep metrics bounded on long blocks
            let top = metric.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if top.abs() > 1e12 {
                metric.iter_mut().for_each(|m| *m -= top);
            }
        }
        let mut out = vec![0u8; steps];
        let mut state = 0usize;
        for t in (0..steps).rev() {
            out[t] = (state >> 5) as u8;
            let bit = ((self.decisions[t] >> state) & 1) as usize;
            state = ((state << 1) & (STATES - 1)) | bit;
        }
        out.truncate(steps.saturating_sub(TAIL_BITS));
        Ok(out)
    }
}

pub fn viterbi_decode(llrs: &[f64]) -> Result<Vec<u8>> {
    Viterbi::new().decode(llrs)
}
