//! Spread-pilot channel estimation and single-coefficient equalization.
//!
//! Each subset's `L` chips are despread with the pilot sequence, giving
//!
//! ```text
//! h_hat = c_p^H r / (sqrt(B) x_p) = h_avg + SI + n'
//! ```
//!
//! where `h_avg` is the mean channel over the subset, `SI` is leakage of the
//! data sequences caused by channel variation across the subset and `n'` is
//! despread noise. The same `h_hat` equalizes the `L - 1` data symbols.

use num_complex::Complex64;

use crate::channel::channel_variance;
use crate::config::Equalizer;
use crate::error::{Error, Result};
use crate::fec::EqualizedSymbol;
use crate::precode::{despread, despread_all, SpreadingMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetEstimate {
    pub h_hat: Complex64,
    /// True subset mean, when the caller knows the channel.
    pub h_avg_true: Option<Complex64>,
    pub si_power_pred: f64,
    pub noise_power_pred: f64,
}

impl SubsetEstimate {
    pub fn mse_pred(&self) -> f64 {
        self.si_power_pred + self.noise_power_pred
    }
}

/// `h_hat = c_p^H r / (sqrt(B) x_p)`.
pub fn estimate_subset(
    r: &[Complex64],
    c: &SpreadingMatrix,
    pilot: Complex64,
    boost: f64,
) -> Result<SubsetEstimate> {
    if pilot.norm_sqr() == 0.0 {
        return Err(Error::ZeroPilot);
    }
    let y = despread(r, c, c.pilot_index())?;
    Ok(SubsetEstimate {
        h_hat: y / (pilot * boost.sqrt()),
        h_avg_true: None,
        si_power_pred: 0.0,
        noise_power_pred: 0.0,
    })
}

/// [`estimate_subset`] plus the true subset mean and the closed-form error
/// predictions computed from the known channel `h` over the subset.
pub fn estimate_subset_with_oracle(
    r: &[Complex64],
    c: &SpreadingMatrix,
    pilot: Complex64,
    boost: f64,
    h: &[Complex64],
    noise_var: f64,
) -> Result<SubsetEstimate> {
    let mut est = estimate_subset(r, c, pilot, boost)?;
    let (avg, var) = channel_variance(h);
    est.h_avg_true = Some(avg);
    est.si_power_pred = si_variance(boost, c.size(), var);
    est.noise_power_pred = noise_variance(boost, noise_var);
    Ok(est)
}

/// Self-interference power `(1/B) ((L-1)/L) sigma_h^2`.
pub fn si_variance(boost: f64, l: usize, channel_var: f64) -> f64 {
    (l as f64 - 1.0) / l as f64 * channel_var / boost
}

/// Despread noise power `sigma_n^2 / B`.
pub fn noise_variance(boost: f64, noise_var: f64) -> f64 {
    noise_var / boost
}

/// `(1/B) (((L-1)/L) sigma_h^2 + sigma_n^2)`.
pub fn theoretical_mse(boost: f64, l: usize, channel_var: f64, noise_var: f64) -> f64 {
    si_variance(boost, l, channel_var) + noise_variance(boost, noise_var)
}

/// Self-interference power for one fixed channel vector, averaged over
/// unit-variance data only:
/// `(1/B) sum_{i != p} |sum_j c_pj c_ij (h_j - h_avg)|^2`.
///
/// By orthonormality of the sequence set this equals `sigma_h^2 / B` with
/// `sigma_h^2` the subset variance of `h`, which is `L/(L-1)` times
/// [`si_variance`]. The closed form is exact when `channel_var` is instead
/// read as the variance of i.i.d. channel coefficients about their ensemble
/// mean.
pub fn conditional_si_variance(h: &[Complex64], c: &SpreadingMatrix, boost: f64) -> Result<f64> {
    let (avg, _) = channel_variance(h);
    let p = c.pilot_index();
    let v: Vec<Complex64> = h
        .iter()
        .enumerate()
        .map(|(j, &hj)| (hj - avg) * c.entry(p, j))
        .collect();
    let a = despread_all(&v, c)?;
    Ok(a.iter()
        .enumerate()
        .filter(|&(i, _)| i != p)
        .map(|(_, x)| x.norm_sqr())
        .sum::<f64>()
        / boost)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizerSettings {
    pub mode: Equalizer,
    /// Chip noise variance `sigma_n^2`.
    pub noise_var: f64,
    /// Extra interference power added to `noise_var` for the demapper.
    pub extra_var: f64,
    /// `|h_hat|` below this declares the subset erased.
    pub erasure_threshold: f64,
}

impl EqualizerSettings {
    pub fn zf(noise_var: f64) -> Self {
        EqualizerSettings {
            mode: Equalizer::Zf,
            noise_var,
            extra_var: 0.0,
            erasure_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedSubset {
    /// Data symbols in sequence order, pilot skipped.
    pub symbols: Vec<EqualizedSymbol>,
    pub erased: bool,
}

/// Despreads every data sequence and equalizes with the single subset
/// estimate. Each output carries the residual complex gain and noise
/// variance the soft demapper needs.
pub fn equalize_subset(
    r: &[Complex64],
    c: &SpreadingMatrix,
    h_hat: Complex64,
    settings: &EqualizerSettings,
) -> Result<EqualizedSubset> {
    let y = despread_all(r, c)?;
    let p = c.pilot_index();
    let erased = h_hat.norm() < settings.erasure_threshold;
    let nv = settings.noise_var + settings.extra_var;
    let h2 = h_hat.norm_sqr();
    let (scale, gain, noise_var) = if erased {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0)
    } else {
        match settings.mode {
            Equalizer::Zf => (1.0 / h_hat, Complex64::new(1.0, 0.0), nv / h2),
            Equalizer::Mmse => {
                let d = h2 + settings.noise_var;
                (
                    h_hat.conj() / d,
                    Complex64::new(h2 / d, 0.0),
                    nv * h2 / (d * d),
                )
            }
        }
    };
    let symbols = y
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != p)
        .map(|(_, &yi)| EqualizedSymbol {
            value: yi * scale,
            gain,
            noise_var,
        })
        .collect();
    Ok(EqualizedSubset { symbols, erased })
}
