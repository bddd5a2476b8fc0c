//! Simulation configuration and its flat `key = value` text format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Qam16,
    Qam64,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Qam16 => 4,
            Constellation::Qam64 => 6,
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constellation::Qam16 => "16qam",
            Constellation::Qam64 => "64qam",
        })
    }
}

impl FromStr for Constellation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "16qam" | "qam16" | "16" => Ok(Constellation::Qam16),
            "64qam" | "qam64" | "64" => Ok(Constellation::Qam64),
            other => Err(format!("unknown constellation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeRate {
    R12,
    R34,
    R56,
}

impl CodeRate {
    /// `(information bits, transmitted bits)` per puncturing period.
    pub fn ratio(self) -> (usize, usize) {
        match self {
            CodeRate::R12 => (1, 2),
            CodeRate::R34 => (3, 4),
            CodeRate::R56 => (5, 6),
        }
    }

    pub fn value(self) -> f64 {
        let (k, n) = self.ratio();
        k as f64 / n as f64
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, n) = self.ratio();
        write!(f, "{k}/{n}")
    }
}

impl FromStr for CodeRate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1/2" | "12" => Ok(CodeRate::R12),
            "3/4" | "34" => Ok(CodeRate::R34),
            "5/6" | "56" => Ok(CodeRate::R56),
            other => Err(format!("unknown code rate `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelId {
    F1,
    P1,
    Flat,
    Custom(PathBuf),
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelId::F1 => f.write_str("F1"),
            ChannelId::P1 => f.write_str("P1"),
            ChannelId::Flat => f.write_str("FLAT"),
            ChannelId::Custom(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for ChannelId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "F1" => Ok(ChannelId::F1),
            "P1" => Ok(ChannelId::P1),
            "FLAT" => Ok(ChannelId::Flat),
            "" => Err("empty channel id".into()),
            _ => Ok(ChannelId::Custom(PathBuf::from(s))),
        }
    }
}

/// Where the channel is applied: directly on carriers, or by convolution on
/// the OFDM time signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    Frequency,
    Time,
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelMode::Frequency => "frequency",
            ChannelMode::Time => "time",
        })
    }
}

impl FromStr for ChannelMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "frequency" | "freq" => Ok(ChannelMode::Frequency),
            "time" => Ok(ChannelMode::Time),
            other => Err(format!("unknown channel mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equalizer {
    Zf,
    Mmse,
}

impl fmt::Display for Equalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equalizer::Zf => "zf",
            Equalizer::Mmse => "mmse",
        })
    }
}

impl FromStr for Equalizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "zf" => Ok(Equalizer::Zf),
            "mmse" => Ok(Equalizer::Mmse),
            other => Err(format!("unknown equalizer `{other}`")),
        }
    }
}

/// All simulation parameters. [`Default`] gives the 8 MHz / 2K broadcast
/// preset with a 32-symbol frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub fft_size: usize,
    pub guard_samples: usize,
    pub bandwidth_hz: f64,
    /// OFDM symbols per simulated frame.
    pub n_symbols: usize,
    /// Active carriers per OFDM symbol (LP-OFDM mode).
    pub n_active_carriers: usize,
    pub lt: usize,
    pub lf: usize,
    /// `lt * lf`; filled in by [`LinkConfig::validate`].
    pub l: usize,
    /// 1-based index of the pilot sequence.
    pub pilot_index: usize,
    pub boost: f64,
    pub constellation: Constellation,
    pub code_rate: CodeRate,
    pub channel: ChannelId,
    pub channel_mode: ChannelMode,
    /// Redraw tap phases per trial. Off for the deterministic F1/P1 profiles.
    pub channel_per_trial: bool,
    pub snr_grid: Vec<f64>,
    pub master_seed: u64,
    pub equalizer: Equalizer,
    /// Classical pilot-grid system with perfect channel knowledge.
    pub baseline_mode: bool,
    pub interleaver: bool,
    /// Add the predicted self-interference power to the demapper noise
    /// variance, using the true per-subset channel variance.
    pub oracle_si: bool,
    /// Equalize LP-OFDM subsets with the true subset mean instead of the
    /// spread-pilot estimate.
    pub perfect_csi: bool,
    /// Bypass the convolutional code; BER is then measured on raw QAM bits.
    pub uncoded: bool,
    /// Data carriers of the classical 2K system.
    pub dvbt_data_carriers: usize,
    pub dvbt_pilot_density: f64,
    /// Power of a boosted classical pilot relative to a data cell.
    pub dvbt_pilot_power: f64,
    pub min_errors: u64,
    pub max_bits: u64,
    pub min_reliable_errors: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            fft_size: 2048,
            guard_samples: 512,
            bandwidth_hz: 8e6,
            n_symbols: 32,
            n_active_carriers: 1728,
            lt: 1,
            lf: 2,
            l: 2,
            pilot_index: 1,
            boost: 1.0,
            constellation: Constellation::Qam16,
            code_rate: CodeRate::R34,
            channel: ChannelId::F1,
            channel_mode: ChannelMode::Frequency,
            channel_per_trial: false,
            snr_grid: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            master_seed: 1,
            equalizer: Equalizer::Zf,
            baseline_mode: false,
            interleaver: false,
            oracle_si: false,
            perfect_csi: false,
            uncoded: false,
            dvbt_data_carriers: 1512,
            dvbt_pilot_density: 1.0 / 12.0,
            dvbt_pilot_power: 16.0 / 9.0,
            min_errors: 100,
            max_bits: 10_000_000,
            min_reliable_errors: 20,
        }
    }
}

const KEYS: &[&str] = &[
    "fft_size",
    "guard_samples",
    "bandwidth_hz",
    "n_symbols",
    "n_active_carriers",
    "lt",
    "lf",
    "l",
    "pilot_index",
    "boost",
    "constellation",
    "code_rate",
    "channel",
    "channel_mode",
    "channel_per_trial",
    "snr_grid",
    "master_seed",
    "equalizer",
    "baseline_mode",
    "interleaver",
    "oracle_si",
    "perfect_csi",
    "uncoded",
    "dvbt_data_carriers",
    "dvbt_pilot_density",
    "dvbt_pilot_power",
    "min_errors",
    "max_bits",
    "min_reliable_errors",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad value `{value}` for `{key}`: {e}"))
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("bad boolean `{value}` for `{key}`")),
    }
}

impl LinkConfig {
    /// Sets one field from its text form. Shared by the file parser and the
    /// CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "fft_size" => self.fft_size = parse_value(key, value)?,
            "guard_samples" => self.guard_samples = parse_value(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_value(key, value)?,
            "n_symbols" => self.n_symbols = parse_value(key, value)?,
            "n_active_carriers" => self.n_active_carriers = parse_value(key, value)?,
            "lt" => self.lt = parse_value(key, value)?,
            "lf" => self.lf = parse_value(key, value)?,
            "l" => self.l = parse_value(key, value)?,
            "pilot_index" => self.pilot_index = parse_value(key, value)?,
            "boost" => self.boost = parse_value(key, value)?,
            "constellation" => self.constellation = parse_value(key, value)?,
            "code_rate" => self.code_rate = parse_value(key, value)?,
            "channel" => self.channel = parse_value(key, value)?,
            "channel_mode" => self.channel_mode = parse_value(key, value)?,
            "channel_per_trial" => self.channel_per_trial = parse_bool(key, value)?,
            "snr_grid" => {
                self.snr_grid = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|v| parse_value::<f64>(key, v.trim()))
                        .collect::<std::result::Result<_, _>>()?
                }
            }
            "master_seed" => self.master_seed = parse_value(key, value)?,
            "equalizer" => self.equalizer = parse_value(key, value)?,
            "baseline_mode" => self.baseline_mode = parse_bool(key, value)?,
            "interleaver" => self.interleaver = parse_bool(key, value)?,
            "oracle_si" => self.oracle_si = parse_bool(key, value)?,
            "perfect_csi" => self.perfect_csi = parse_bool(key, value)?,
            "uncoded" => self.uncoded = parse_bool(key, value)?,
            "dvbt_data_carriers" => self.dvbt_data_carriers = parse_value(key, value)?,
            "dvbt_pilot_density" => self.dvbt_pilot_density = parse_value(key, value)?,
            "dvbt_pilot_power" => self.dvbt_pilot_power = parse_value(key, value)?,
            "min_errors" => self.min_errors = parse_value(key, value)?,
            "max_bits" => self.max_bits = parse_value(key, value)?,
            "min_reliable_errors" => self.min_reliable_errors = parse_value(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "fft_size" => self.fft_size.to_string(),
            "guard_samples" => self.guard_samples.to_string(),
            "bandwidth_hz" => self.bandwidth_hz.to_string(),
            "n_symbols" => self.n_symbols.to_string(),
            "n_active_carriers" => self.n_active_carriers.to_string(),
            "lt" => self.lt.to_string(),
            "lf" => self.lf.to_string(),
            "l" => self.l.to_string(),
            "pilot_index" => self.pilot_index.to_string(),
            "boost" => self.boost.to_string(),
            "constellation" => self.constellation.to_string(),
            "code_rate" => self.code_rate.to_string(),
            "channel" => self.channel.to_string(),
            "channel_mode" => self.channel_mode.to_string(),
            "channel_per_trial" => self.channel_per_trial.to_string(),
            "snr_grid" => self
                .snr_grid
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            "master_seed" => self.master_seed.to_string(),
            "equalizer" => self.equalizer.to_string(),
            "baseline_mode" => self.baseline_mode.to_string(),
            "interleaver" => self.interleaver.to_string(),
            "oracle_si" => self.oracle_si.to_string(),
            "perfect_csi" => self.perfect_csi.to_string(),
            "uncoded" => self.uncoded.to_string(),
            "dvbt_data_carriers" => self.dvbt_data_carriers.to_string(),
            "dvbt_pilot_density" => self.dvbt_pilot_density.to_string(),
            "dvbt_pilot_power" => self.dvbt_pilot_power.to_string(),
            "min_errors" => self.min_errors.to_string(),
            "max_bits" => self.max_bits.to_string(),
            "min_reliable_errors" => self.min_reliable_errors.to_string(),
            _ => unreachable!("key list and getter out of sync"),
        }
    }

    /// Parses the text format, starting from the defaults. Keys not present
    /// keep their default value. `l` may be omitted; if given it must equal
    /// `lt * lf`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = LinkConfig {
            l: 0,
            ..LinkConfig::default()
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line: idx + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value)
                .map_err(|reason| Error::ConfigSyntax {
                    line: idx + 1,
                    reason,
                })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical serialization: every key, fixed order, one per line.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key));
            out.push('\n');
        }
        out
    }

    /// Checks every invariant and fills in the derived `l`. Returns the
    /// first violation.
    pub fn validate(mut self) -> Result<Self> {
        fn bad(field: &'static str, reason: String) -> Error {
            Error::InvalidConfig { field, reason }
        }
        if self.fft_size == 0 {
            return Err(bad("fft_size", "must be positive".into()));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(bad("bandwidth_hz", "must be positive".into()));
        }
        if self.lt == 0 || self.lf == 0 {
            return Err(bad("l", "spreading factors must be positive".into()));
        }
        let l = self.lt * self.lf;
        if !l.is_power_of_two() {
            return Err(bad("l", format!("L={l} not a power of two")));
        }
        if !self.lt.is_power_of_two() {
            return Err(bad("lt", format!("Lt={} not a power of two", self.lt)));
        }
        if self.l != 0 && self.l != l {
            return Err(bad("l", format!("L={} does not equal Lt*Lf={l}", self.l)));
        }
        self.l = l;
        if self.pilot_index == 0 || self.pilot_index > l {
            return Err(bad(
                "pilot_index",
                format!("p={} outside [1, {l}]", self.pilot_index),
            ));
        }
        if !(self.boost.is_finite() && self.boost > 0.0) {
            return Err(bad("boost", format!("B={} must be positive", self.boost)));
        }
        if self.n_active_carriers == 0 || self.n_active_carriers >= self.fft_size {
            return Err(bad(
                "n_active_carriers",
                format!(
                    "{} active carriers need an FFT larger than {}",
                    self.n_active_carriers, self.fft_size
                ),
            ));
        }
        if self.n_symbols == 0 || self.n_symbols % self.lt != 0 {
            return Err(bad(
                "n_symbols",
                format!(
                    "{} symbols not a multiple of Lt={}",
                    self.n_symbols, self.lt
                ),
            ));
        }
        if self.n_active_carriers % self.lf != 0 {
            return Err(bad(
                "n_active_carriers",
                format!(
                    "{} carriers not a multiple of Lf={}",
                    self.n_active_carriers, self.lf
                ),
            ));
        }
        if self.snr_grid.iter().any(|v| !v.is_finite()) {
            return Err(bad("snr_grid", "non-finite entry".into()));
        }
        if !(0.0..1.0).contains(&self.dvbt_pilot_density) || self.dvbt_pilot_power <= 0.0 {
            return Err(bad(
                "dvbt_pilot_density",
                "density must be in [0, 1) and pilot power positive".into(),
            ));
        }
        if self.max_bits == 0 {
            return Err(bad("max_bits", "must be positive".into()));
        }
        Ok(self)
    }

    /// Elementary period of the broadcast standard: 7/64 us for 8 MHz.
    pub fn sample_period(&self) -> f64 {
        7.0 / (8.0 * self.bandwidth_hz)
    }

    /// Total OFDM symbol duration including the guard interval.
    pub fn symbol_duration(&self) -> f64 {
        (self.fft_size + self.guard_samples) as f64 * self.sample_period()
    }

    pub fn guard_duration(&self) -> f64 {
        self.guard_samples as f64 * self.sample_period()
    }

    pub fn subsets_per_frame(&self) -> usize {
        (self.n_symbols / self.lt) * (self.n_active_carriers / self.lf)
    }
}

/// Free-function form of [`LinkConfig::validate`].
pub fn validate_config(cfg: LinkConfig) -> Result<LinkConfig> {
    cfg.validate()
}
