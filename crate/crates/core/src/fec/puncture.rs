use crate::config::CodeRate;

/// Transmission masks for the two mother-code outputs over one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PuncturePattern {
    pub first: &'static [u8],
    pub second: &'static [u8],
}

impl PuncturePattern {
    pub fn for_rate(rate: CodeRate) -> Self {
        match rate {
            CodeRate::R12 => PuncturePattern {
                first: &[1],
                second: &[1],
            },
            CodeRate::R34 => PuncturePattern {
                first: &[1, 0, 1],
                second: &[1, 1, 0],
            },
            CodeRate::R56 => PuncturePattern {
                first: &[1, 0, 1, 0, 1],
                second: &[1, 1, 0, 1, 0],
            },
        }
    }

    pub fn period(&self) -> usize {
        self.first.len()
    }

    #[inline]
    fn keep(&self, mother_index: usize) -> bool {
        let step = (mother_index / 2) % self.period();
        let mask = if mother_index % 2 == 0 {
            self.first
        } else {
            self.second
        };
        mask[step] == 1
    }
}

/// Number of transmitted bits for `steps` trellis steps.
pub fn punctured_len(steps: usize, rate: CodeRate) -> usize {
    let p = PuncturePattern::for_rate(rate);
    (0..2 * steps).filter(|&i| p.keep(i)).count()
}

pub fn puncture(coded: &[u8], rate: CodeRate) -> Vec<u8> {
    let p = PuncturePattern::for_rate(rate);
    coded
        .iter()
        .enumerate()
        .filter(|(i, _)| p.keep(*i))
        .map(|(_, &b)| b)
        .collect()
}

/// Re-inserts zero LLRs at punctured positions. `mother_len` is the
/// unpunctured length (`2 * steps`). Missing trailing LLRs are erasures.
pub fn depuncture(llrs: &[f64], rate: CodeRate, mother_len: usize) -> Vec<f64> {
    let p = PuncturePattern::for_rate(rate);
    let mut it = llrs.iter();
    (0..mother_len)
        .map(|i| {
            if p.keep(i) {
                it.next().copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect()
}
