//! Gray-labelled square QAM following the DVB-T non-hierarchical mapping,
//! and an exact max-log soft demapper.
//!
//! Symbol bits `y0 y1 y2 ...`: even positions label the in-phase axis, odd
//! positions the quadrature axis; the first bit of each axis is the sign
//! (0 = positive), the rest pick the magnitude in Gray order from the
//! outermost level inwards.

use num_complex::Complex64;

use crate::config::Constellation;
use crate::error::{Error, Result};

/// Axis level for each axis label, label bits read MSB-first.
const AXIS16: [f64; 4] = [3.0, 1.0, -3.0, -1.0];
const AXIS64: [f64; 8] = [7.0, 5.0, 1.0, 3.0, -7.0, -5.0, -1.0, -3.0];

fn axis_table(c: Constellation) -> (&'static [f64], f64) {
    match c {
        Constellation::Qam16 => (&AXIS16, 1.0 / 10f64.sqrt()),
        Constellation::Qam64 => (&AXIS64, 1.0 / 42f64.sqrt()),
    }
}

/// Maps `bits` to unit-average-energy symbols.
pub fn qam_map(bits: &[u8], c: Constellation) -> Result<Vec<Complex64>> {
    let m = c.bits_per_symbol();
    if bits.len() % m != 0 {
        return Err(Error::BitAlignment {
            bits: bits.len(),
            per_symbol: m,
        });
    }
    let (table, scale) = axis_table(c);
    let half = m / 2;
    Ok(bits
        .chunks_exact(m)
        .map(|sym| {
            let (mut li, mut lq) = (0usize, 0usize);
            for k in 0..half {
                li = (li << 1) | (sym[2 * k] & 1) as usize;
                lq = (lq << 1) | (sym[2 * k + 1] & 1) as usize;
            }
            Complex64::new(table[li] * scale, table[lq] * scale)
        })
        .collect())
}

/// A received data symbol after despreading, modelled as
/// `value = gain * x + noise` with `E|noise|^2 = noise_var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizedSymbol {
    pub value: Complex64,
    pub gain: Complex64,
    pub noise_var: f64,
}

#[derive(Debug, Clone)]
pub struct Demapper {
    constellation: Constellation,
    /// LLR saturation bound.
    pub clip: f64,
}

impl Demapper {
    pub fn new(constellation: Constellation) -> Self {
        Demapper {
            constellation,
            clip: 1e6,
        }
    }

    pub fn constellation(&self) -> Constellation {
        self.constellation
    }

    /// Appends `bits_per_symbol` LLRs for one symbol. A zero gain yields
    /// erasures.
    pub fn demap_into(&self, sym: EqualizedSymbol, out: &mut Vec<f64>) {
        let m = self.constellation.bits_per_symbol();
        let g2 = sym.gain.norm_sqr();
        if g2 == 0.0 || !g2.is_finite() {
            out.extend(std::iter::repeat_n(0.0, m));
            return;
        }
        let z = sym.value / sym.gain;
        let w = g2 / sym.noise_var.max(f64::MIN_POSITIVE);
        let (table, scale) = axis_table(self.constellation);
        let half = m / 2;
        let start = out.len();
        out.extend(std::iter::repeat_n(0.0, m));
        for (axis, coord) in [z.re, z.im].into_iter().enumerate() {
            let mut best = [[f64::INFINITY; 2]; 3];
            for (label, &level) in table.iter().enumerate() {
                let d = (coord - level * scale).powi(2);
                for k in 0..half {
                    let bit = (label >> (half - 1 - k)) & 1;
                    if d < best[k][bit] {
                        best[k][bit] = d;
                    }
                }
            }
            for k in 0..half {
                let llr = (w * (best[k][1] - best[k][0])).clamp(-self.clip, self.clip);
                out[start + 2 * k + axis] = llr;
            }
        }
    }

    pub fn demap(&self, symbols: &[EqualizedSymbol]) -> Vec<f64> {
        let mut out = Vec::with_capacity(symbols.len() * self.constellation.bits_per_symbol());
        for &s in symbols {
            self.demap_into(s, &mut out);
        }
        out
    }
}

/// Max-log LLRs for symbols sharing one complex gain and noise variance.
pub fn qam_demap(
    symbols: &[Complex64],
    noise_var: f64,
    gain: Complex64,
    c: Constellation,
) -> Vec<f64> {
    let d = Demapper::new(c);
    let mut out = Vec::with_capacity(symbols.len() * c.bits_per_symbol());
    for &value in symbols {
        d.demap_into(
            EqualizedSymbol {
                value,
                gain,
                noise_var,
            },
            &mut out,
        );
    }
    out
}
