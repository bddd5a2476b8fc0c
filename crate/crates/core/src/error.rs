use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration invariant does not hold. `field` names the invariant.
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("frame {rows}x{cols} does not tile into {lt}x{lf} subsets")]
    Tiling {
        rows: usize,
        cols: usize,
        lt: usize,
        lf: usize,
    },

    #[error("{carriers} active carriers do not fit in FFT size {fft_size}")]
    TooManyCarriers { carriers: usize, fft_size: usize },

    #[error("tap file {path:?} line {line}: {reason}")]
    TapFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("tap set has zero total power")]
    ZeroPower,

    #[error("pilot symbol is zero")]
    ZeroPilot,

    #[error("coded length {0} is not a multiple of 2")]
    OddCodedLength(usize),

    #[error("bit count {bits} not divisible by {per_symbol} bits per symbol")]
    BitAlignment { bits: usize, per_symbol: usize },

    #[error("report parse error: {0}")]
    Report(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the configuration or its input files
    /// rather than by the computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::ConfigSyntax { .. }
                | Error::NotPowerOfTwo(_)
                | Error::Tiling { .. }
                | Error::TooManyCarriers { .. }
                | Error::TapFile { .. }
                | Error::ZeroPower
        )
    }
}
