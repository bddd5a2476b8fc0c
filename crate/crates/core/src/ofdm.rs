//! OFDM modulation with a cyclic-prefix guard interval.
//!
//! Both transforms are unitary (`1/sqrt(N)`), so per-carrier and per-sample
//! variances are the same and AWGN can be injected in either domain.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::LinkConfig;
use crate::error::{Error, Result};
use crate::frame::ComplexFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainSignal {
    pub samples: Vec<Complex64>,
    pub sample_period: f64,
}

/// Signed carrier index (relative to DC) of each active carrier column.
/// Carriers are split symmetrically around DC, which is left empty; an odd
/// count puts the extra carrier on the negative side.
pub fn carrier_offsets(n_active: usize) -> Vec<i64> {
    let neg = n_active.div_ceil(2) as i64;
    let pos = (n_active / 2) as i64;
    (-neg..0).chain(1..=pos).collect()
}

#[derive(Clone)]
pub struct OfdmModem {
    fft_size: usize,
    guard: usize,
    sample_period: f64,
    bins: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmModem")
            .field("fft_size", &self.fft_size)
            .field("guard", &self.guard)
            .field("active", &self.bins.len())
            .finish()
    }
}

impl OfdmModem {
    pub fn new(fft_size: usize, guard: usize, n_active: usize, sample_period: f64) -> Result<Self> {
        if n_active >= fft_size {
            return Err(Error::TooManyCarriers {
                carriers: n_active,
                fft_size,
            });
        }
        let n = fft_size as i64;
        let bins = carrier_offsets(n_active)
            .into_iter()
            .map(|k| k.rem_euclid(n) as usize)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(OfdmModem {
            fft_size,
            guard,
            sample_period,
            bins,
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
        })
    }

    pub fn from_config(cfg: &LinkConfig) -> Result<Self> {
        Self::new(
            cfg.fft_size,
            cfg.guard_samples,
            cfg.n_active_carriers,
            cfg.sample_period(),
        )
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.guard
    }

    pub fn n_active(&self) -> usize {
        self.bins.len()
    }

    pub fn modulate(&self, frame: &ComplexFrame) -> Result<TimeDomainSignal> {
        if frame.n_carriers() != self.bins.len() {
            return Err(Error::SizeMismatch {
                expected: self.bins.len(),
                got: frame.n_carriers(),
            });
        }
        let n = self.fft_size;
        let norm = 1.0 / (n as f64).sqrt();
        let mut samples = Vec::with_capacity(frame.n_symbols() * self.symbol_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for t in 0..frame.n_symbols() {
            buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            for (&bin, &v) in self.bins.iter().zip(frame.symbol(t)) {
                buf[bin] = v;
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().for_each(|x| *x *= norm);
            samples.extend_from_slice(&buf[n - self.guard..]);
            samples.extend_from_slice(&buf);
        }
        Ok(TimeDomainSignal {
            samples,
            sample_period: self.sample_period,
        })
    }

    pub fn demodulate(&self, signal: &TimeDomainSignal) -> Result<ComplexFrame> {
        let sym = self.symbol_len();
        if signal.samples.len() % sym != 0 {
            return Err(Error::SizeMismatch {
                expected: (signal.samples.len() / sym + 1) * sym,
                got: signal.samples.len(),
            });
        }
        let n = self.fft_size;
        let norm = 1.0 / (n as f64).sqrt();
        let n_symbols = signal.samples.len() / sym;
        let mut frame = ComplexFrame::zeros(n_symbols, self.bins.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for t in 0..n_symbols {
            let start = t * sym + self.guard;
            buf.copy_from_slice(&signal.samples[start..start + n]);
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for (dst, &bin) in frame.symbol_mut(t).iter_mut().zip(&self.bins) {
                *dst = buf[bin] * norm;
            }
        }
        Ok(frame)
    }
}

pub fn ofdm_modulate(frame: &ComplexFrame, cfg: &LinkConfig) -> Result<TimeDomainSignal> {
    OfdmModem::new(
        cfg.fft_size,
        cfg.guard_samples,
        frame.n_carriers(),
        cfg.sample_period(),
    )?
    .modulate(frame)
}

pub fn ofdm_demodulate(signal: &TimeDomainSignal, cfg: &LinkConfig) -> Result<ComplexFrame> {
    OfdmModem::from_config(cfg)?.demodulate(signal)
}
