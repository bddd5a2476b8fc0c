//! Link-level simulation of 2D linearly precoded OFDM with spread-pilot
//! channel estimation.
//!
//! The transmit chain spreads every block of `L - 1` data symbols plus one
//! pilot over a Walsh-Hadamard sequence set, maps the chips onto an
//! `Lt x Lf` time-frequency tile and OFDM-modulates the frame. The receiver
//! despreads each tile with the pilot sequence to get a single channel
//! coefficient, equalizes the data symbols with it, and feeds soft bits to a
//! Viterbi decoder.
//!
//! Module map:
//!
//! * [`config`], [`rng`], [`frame`]: shared types and the deterministic
//!   random-stream contract.
//! * [`precode`]: Walsh-Hadamard spreading and zigzag-in-time chip mapping.
//! * [`ofdm`]: IFFT/FFT with cyclic prefix.
//! * [`channel`]: F1/P1/flat tapped-delay-line channels and AWGN.
//! * [`fec`]: convolutional code, puncturing, QAM mapping and Viterbi.
//! * [`estimator`]: spread-pilot channel estimator, equalizer and the
//!   closed-form error predictors.
//! * [`harness`]: Monte Carlo experiments, bit-rate calculator and reports.

pub mod channel;
pub mod config;
pub mod error;
pub mod estimator;
pub mod fec;
pub mod frame;
pub mod harness;
pub mod ofdm;
pub mod precode;
pub mod rng;

pub use config::LinkConfig;
pub use error::{Error, Result};
pub use frame::ComplexFrame;
pub use num_complex::Complex64;
pub use rng::RngStream;
