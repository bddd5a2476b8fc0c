//! Static tapped-delay-line channels and AWGN.
//!
//! Tap tables live in text files (one `rho tau_us theta_rad` per line, an
//! optional `LOS rho tau_us theta_rad` line, `#` comments). The F1, P1 and
//! FLAT profiles ship with the crate. No Doppler: a realization is the same
//! for every OFDM symbol of a frame.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::config::{ChannelId, LinkConfig};
use crate::error::{Error, Result};
use crate::frame::ComplexFrame;
use crate::ofdm::{carrier_offsets, TimeDomainSignal};
use crate::precode::Tiling;
use crate::rng::RngStream;

const F1_TAPS: &str = include_str!("../data/f1.taps");
const P1_TAPS: &str = include_str!("../data/p1.taps");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub amplitude: f64,
    /// Seconds.
    pub delay: f64,
    /// Phase of the complex gain, radians.
    pub phase: f64,
}

impl Tap {
    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    pub taps: Vec<Tap>,
    pub line_of_sight: Option<Tap>,
    /// Amplitude scale that was applied to reach unit total power.
    pub normalization: f64,
    /// Hex SHA-256 of the source text.
    pub content_hash: String,
}

impl TapSet {
    pub fn flat() -> Self {
        TapSet {
            taps: vec![Tap {
                amplitude: 1.0,
                delay: 0.0,
                phase: 0.0,
            }],
            line_of_sight: None,
            normalization: 1.0,
            content_hash: hash_text("FLAT"),
        }
    }

    /// Parses tap-file text and normalizes to unit power. `origin` is only
    /// used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, reason: String| Error::TapFile {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut taps = Vec::new();
        let mut los = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields: Vec<&str> = line.split_whitespace().collect();
            let is_los = fields[0].eq_ignore_ascii_case("LOS");
            if is_los {
                fields.remove(0);
            }
            if fields.len() != 3 {
                return Err(err(idx + 1, format!("expected 3 numbers, got `{line}`")));
            }
            let nums: Vec<f64> = fields
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(idx + 1, e.to_string()))?;
            if nums.iter().any(|v| !v.is_finite()) || nums[0] < 0.0 || nums[1] < 0.0 {
                return Err(err(
                    idx + 1,
                    "amplitude and delay must be finite and >= 0".into(),
                ));
            }
            let tap = Tap {
                amplitude: nums[0],
                delay: nums[1] * 1e-6,
                phase: -nums[2],
            };
            if is_los {
                if los.replace(tap).is_some() {
                    return Err(err(idx + 1, "more than one LOS line".into()));
                }
            } else {
                taps.push(tap);
            }
        }
        let mut set = TapSet {
            taps,
            line_of_sight: los,
            normalization: 1.0,
            content_hash: hash_text(text),
        };
        set.normalize()?;
        Ok(set)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    fn all_taps(&self) -> impl Iterator<Item = &Tap> {
        self.line_of_sight.iter().chain(self.taps.iter())
    }

    pub fn total_power(&self) -> f64 {
        self.all_taps().map(|t| t.amplitude * t.amplitude).sum()
    }

    fn normalize(&mut self) -> Result<()> {
        let p = self.total_power();
        if !(p > 0.0) {
            return Err(Error::ZeroPower);
        }
        let scale = 1.0 / p.sqrt();
        self.taps.iter_mut().for_each(|t| t.amplitude *= scale);
        if let Some(t) = self.line_of_sight.as_mut() {
            t.amplitude *= scale;
        }
        self.normalization *= scale;
        Ok(())
    }

    /// Rice factor: direct-path power over echo power. Zero without a direct
    /// path.
    pub fn k_factor(&self) -> f64 {
        let echo: f64 = self.taps.iter().map(|t| t.amplitude * t.amplitude).sum();
        self.line_of_sight
            .map(|t| t.amplitude * t.amplitude / echo)
            .unwrap_or(0.0)
    }

    pub fn max_delay(&self) -> f64 {
        self.all_taps().map(|t| t.delay).fold(0.0, f64::max)
    }

    /// Same taps with delays snapped to the nearest multiple of
    /// `sample_period`.
    pub fn rounded(&self, sample_period: f64) -> TapSet {
        let snap = |t: &Tap| Tap {
            delay: (t.delay / sample_period).round() * sample_period,
            ..*t
        };
        TapSet {
            taps: self.taps.iter().map(snap).collect(),
            line_of_sight: self.line_of_sight.as_ref().map(snap),
            ..self.clone()
        }
    }

    /// Echo phases redrawn uniformly; used only when per-trial channel
    /// re-randomization is switched on.
    pub fn with_random_phases(&self, rng: &mut RngStream) -> TapSet {
        let mut out = self.clone();
        for t in out.taps.iter_mut() {
            t.phase = 2.0 * PI * rng.uniform();
        }
        out
    }

    /// Warning text when the delay spread exceeds the guard interval.
    pub fn guard_warning(&self, cfg: &LinkConfig) -> Option<String> {
        let max = self.max_delay();
        (max > cfg.guard_duration()).then(|| {
            format!(
                "channel delay spread {:.3} us exceeds guard interval {:.3} us",
                max * 1e6,
                cfg.guard_duration() * 1e6
            )
        })
    }
}

fn hash_text(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_tap_set(id: &ChannelId) -> Result<TapSet> {
    match id {
        ChannelId::Flat => Ok(TapSet::flat()),
        ChannelId::F1 => TapSet::parse(F1_TAPS, &PathBuf::from("<builtin F1>")),
        ChannelId::P1 => TapSet::parse(P1_TAPS, &PathBuf::from("<builtin P1>")),
        ChannelId::Custom(path) => TapSet::from_file(path),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Frequency response on the active carriers, in frame column order.
    pub h: Vec<Complex64>,
    /// `(delay in samples, gain)` for time-domain mode, sorted by delay with
    /// coincident taps merged.
    pub impulse: Vec<(usize, Complex64)>,
}

/// Evaluates `h_k = sum_j g_j exp(-2 pi i f_k tau_j)` at the active carrier
/// frequencies using exact delays, and samples the impulse response with
/// delays rounded to the nearest sample.
pub fn realize_channel(taps: &TapSet, cfg: &LinkConfig) -> ChannelRealization {
    let n = cfg.fft_size as f64;
    let spacing = 1.0 / (n * cfg.sample_period());
    let gains: Vec<(f64, Complex64)> = taps.all_taps().map(|t| (t.delay, t.gain())).collect();
    let h = carrier_offsets(cfg.n_active_carriers)
        .into_iter()
        .map(|k| {
            let f = k as f64 * spacing;
            gains
                .iter()
                .map(|&(tau, g)| g * Complex64::from_polar(1.0, -2.0 * PI * f * tau))
                .sum()
        })
        .collect();
    let mut impulse: Vec<(usize, Complex64)> = Vec::new();
    for &(tau, g) in &gains {
        let d = (tau / cfg.sample_period()).round() as usize;
        match impulse.iter_mut().find(|(dd, _)| *dd == d) {
            Some(entry) => entry.1 += g,
            None => impulse.push((d, g)),
        }
    }
    impulse.sort_by_key(|&(d, _)| d);
    ChannelRealization { h, impulse }
}

/// Frequency-domain channel: `r = h . s + n` on every OFDM symbol.
pub fn apply_channel_frequency(
    frame: &ComplexFrame,
    realization: &ChannelRealization,
    noise_var: f64,
    rng: &mut RngStream,
) -> Result<ComplexFrame> {
    if frame.n_carriers() != realization.h.len() {
        return Err(Error::SizeMismatch {
            expected: realization.h.len(),
            got: frame.n_carriers(),
        });
    }
    let mut out = frame.clone();
    for t in 0..out.n_symbols() {
        for (x, &h) in out.symbol_mut(t).iter_mut().zip(&realization.h) {
            *x *= h;
            if noise_var > 0.0 {
                *x += rng.complex_gaussian(noise_var);
            }
        }
    }
    Ok(out)
}

/// Time-domain channel: linear convolution with the sampled impulse
/// response (zero history before the first sample) plus AWGN of variance
/// `noise_var` per sample, which is `noise_var` per carrier after the
/// unitary FFT.
pub fn apply_channel_time(
    signal: &TimeDomainSignal,
    realization: &ChannelRealization,
    noise_var: f64,
    rng: &mut RngStream,
) -> TimeDomainSignal {
    let x = &signal.samples;
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for &(d, g) in &realization.impulse {
        for (yn, &xn) in y[d.min(x.len())..].iter_mut().zip(x.iter()) {
            *yn += g * xn;
        }
    }
    if noise_var > 0.0 {
        for yn in y.iter_mut() {
            *yn += rng.complex_gaussian(noise_var);
        }
    }
    TimeDomainSignal {
        samples: y,
        sample_period: signal.sample_period,
    }
}

/// Mean and variance of the channel over one subset:
/// `h_avg = mean(h_j)`, `sigma_h^2 = mean(|h_j - h_avg|^2)`.
pub fn channel_variance(h: &[Complex64]) -> (Complex64, f64) {
    assert!(!h.is_empty(), "empty subset");
    let n = h.len() as f64;
    let avg = h.iter().sum::<Complex64>() / n;
    let var = h.iter().map(|x| (x - avg).norm_sqr()).sum::<f64>() / n;
    (avg, var)
}

/// [`channel_variance`] for every subset of a frame, given the per-carrier
/// response of a static channel.
pub fn subset_statistics(h: &[Complex64], tiling: &Tiling) -> Vec<(Complex64, f64)> {
    (0..tiling.n_subsets())
        .map(|s| {
            let hs: Vec<Complex64> = tiling.carriers(s).into_iter().map(|c| h[c]).collect();
            channel_variance(&hs)
        })
        .collect()
}
