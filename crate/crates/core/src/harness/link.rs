//! One frame through the whole chain:
//! encode, puncture, map, spread, chip-map, OFDM, channel, estimate,
//! equalize, demap, depuncture, Viterbi.

use num_complex::Complex64;

use crate::channel::{
    apply_channel_frequency, apply_channel_time, load_tap_set, realize_channel, subset_statistics,
    ChannelRealization, TapSet,
};
use crate::config::{ChannelMode, LinkConfig};
use crate::error::Result;
use crate::estimator::{
    equalize_subset, estimate_subset, si_variance, theoretical_mse, EqualizerSettings,
};
use crate::fec::{
    conv_encode, depuncture, hard_decisions, puncture, punctured_len, qam_map, Demapper,
    EqualizedSymbol, Interleaver, Viterbi, TAIL_BITS,
};
use crate::frame::ComplexFrame;
use crate::harness::stats::Moments;
use crate::ofdm::OfdmModem;
use crate::precode::{demap_chips, map_chips, SpreadingMatrix, Tiling};
use crate::rng::{stream_id, RngStream, StreamRole};

/// Pilot symbol value before boosting.
pub const PILOT_SYMBOL: Complex64 = Complex64::new(1.0, 0.0);

/// How a frame's coded bits are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeLayout {
    /// Coded bits the frame can carry.
    pub capacity: usize,
    /// Trellis steps including the tail (0 when uncoded).
    pub steps: usize,
    pub info_bits: usize,
    /// Punctured bits actually produced; the rest of the capacity is zero
    /// padding.
    pub sent: usize,
}

impl CodeLayout {
    fn new(capacity: usize, cfg: &LinkConfig) -> Self {
        if cfg.uncoded {
            return CodeLayout {
                capacity,
                steps: 0,
                info_bits: capacity,
                sent: capacity,
            };
        }
        let (k, n) = cfg.code_rate.ratio();
        let mut steps = capacity * k / n;
        while steps > 0 && punctured_len(steps, cfg.code_rate) > capacity {
            steps -= 1;
        }
        CodeLayout {
            capacity,
            steps,
            info_bits: steps.saturating_sub(TAIL_BITS),
            sent: punctured_len(steps, cfg.code_rate),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameOutcome {
    pub info_bits: u64,
    pub bit_errors: u64,
    pub erased_subsets: u64,
}

/// Estimation error statistics for one frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameMse {
    /// `|h_hat - h_avg|^2` over subsets.
    pub sq_error: Moments,
    /// Real and imaginary parts of `h_hat - h_avg`.
    pub err_re: Moments,
    pub err_im: Moments,
}

impl FrameMse {
    pub fn merge(&mut self, o: &FrameMse) {
        self.sq_error.merge(&o.sq_error);
        self.err_re.merge(&o.err_re);
        self.err_im.merge(&o.err_im);
    }
}

pub struct Link {
    cfg: LinkConfig,
    tiling: Tiling,
    spreading: SpreadingMatrix,
    modem: Option<OfdmModem>,
    taps: TapSet,
    realization: ChannelRealization,
    stats: Vec<(Complex64, f64)>,
    layout: CodeLayout,
    interleaver: Option<Interleaver>,
    warnings: Vec<String>,
}

impl Link {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        let cfg = cfg.validate()?;
        let mut taps = load_tap_set(&cfg.channel)?;
        if cfg.channel_mode == ChannelMode::Time {
            taps = taps.rounded(cfg.sample_period());
        }
        let warnings = taps.guard_warning(&cfg).into_iter().collect();
        let (lt, lf) = if cfg.baseline_mode {
            (1, 1)
        } else {
            (cfg.lt, cfg.lf)
        };
        let tiling = Tiling::new(lt, lf, cfg.n_symbols, cfg.n_active_carriers)?;
        let spreading = SpreadingMatrix::new(cfg.l, cfg.pilot_index - 1)?;
        let modem = match cfg.channel_mode {
            ChannelMode::Time => Some(OfdmModem::from_config(&cfg)?),
            ChannelMode::Frequency => None,
        };
        let realization = realize_channel(&taps, &cfg);
        let stats = subset_statistics(&realization.h, &tiling);
        let data_symbols = if cfg.baseline_mode {
            cfg.n_symbols * cfg.n_active_carriers
        } else {
            tiling.n_subsets() * (cfg.l - 1)
        };
        let layout = CodeLayout::new(data_symbols * cfg.constellation.bits_per_symbol(), &cfg);
        let interleaver = cfg.interleaver.then(|| {
            let mut rng =
                RngStream::spawn(cfg.master_seed, stream_id(StreamRole::Interleaver, 0, 0));
            Interleaver::random(layout.capacity, &mut rng)
        });
        Ok(Link {
            cfg,
            tiling,
            spreading,
            modem,
            taps,
            realization,
            stats,
            layout,
            interleaver,
            warnings,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    pub fn layout(&self) -> CodeLayout {
        self.layout
    }

    pub fn tiling(&self) -> &Tiling {
        &self.tiling
    }

    pub fn taps(&self) -> &TapSet {
        &self.taps
    }

    pub fn realization(&self) -> &ChannelRealization {
        &self.realization
    }

    /// `(h_avg, sigma_h^2)` per subset of the fixed realization.
    pub fn subset_stats(&self) -> &[(Complex64, f64)] {
        &self.stats
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Mean chip energy `E|s_j|^2 = (L - 1 + B) / L` (1 for the baseline).
    pub fn chip_energy(&self) -> f64 {
        if self.cfg.baseline_mode {
            1.0
        } else {
            let l = self.cfg.l as f64;
            (l - 1.0 + self.cfg.boost) / l
        }
    }

    /// Transmitted energy per useful data symbol relative to a unit-energy
    /// symbol: `(L - 1 + B)/(L - 1)` for LP-OFDM, the scattered-pilot power
    /// loss for the baseline.
    pub fn overhead_factor(&self) -> f64 {
        if self.cfg.baseline_mode {
            dvbt_pilot_power_loss(self.cfg.dvbt_pilot_density, self.cfg.dvbt_pilot_power)
        } else {
            let l = self.cfg.l as f64;
            if self.cfg.l == 1 {
                f64::INFINITY
            } else {
                (l - 1.0 + self.cfg.boost) / (l - 1.0)
            }
        }
    }

    /// Chip noise variance for a given Eb/N0 in dB:
    /// `sigma_n^2 = overhead / (m * Rc * Eb/N0)`. The outer RS code and the
    /// guard interval are not counted.
    pub fn noise_var_for_ebn0(&self, ebn0_db: f64) -> f64 {
        let m = self.cfg.constellation.bits_per_symbol() as f64;
        let rc = if self.cfg.uncoded {
            1.0
        } else {
            self.cfg.code_rate.value()
        };
        self.overhead_factor() / (m * rc * db_to_lin(ebn0_db))
    }

    /// Chip noise variance for SNR = `E|s_j|^2 / sigma_n^2` in dB.
    pub fn noise_var_for_snr(&self, snr_db: f64) -> f64 {
        self.chip_energy() / db_to_lin(snr_db)
    }

    pub fn ebn0_convention(&self) -> String {
        if self.cfg.baseline_mode {
            "sigma_n^2 = loss / (m * Rc * EbN0), loss = (1 - d + d*P)/(1 - d), d = pilot density, P = pilot power; RS and guard not counted".into()
        } else {
            "sigma_n^2 = ((L-1+B)/(L-1)) / (m * Rc * EbN0); RS and guard not counted".into()
        }
    }

    pub fn snr_convention(&self) -> String {
        "SNR = E|s_j|^2 / sigma_n^2 per chip, E|s_j|^2 = (L-1+B)/L (boost included)".into()
    }

    fn realization_for(&self, frame: u64) -> (ChannelRealization, Vec<(Complex64, f64)>) {
        let mut rng = RngStream::spawn(
            self.cfg.master_seed,
            stream_id(StreamRole::Channel, 0, frame),
        );
        let taps = self.taps.with_random_phases(&mut rng);
        let r = realize_channel(&taps, &self.cfg);
        let stats = subset_statistics(&r.h, &self.tiling);
        (r, stats)
    }

    fn with_channel<T>(
        &self,
        frame: u64,
        f: impl FnOnce(&ChannelRealization, &[(Complex64, f64)]) -> T,
    ) -> T {
        if self.cfg.channel_per_trial {
            let (r, s) = self.realization_for(frame);
            f(&r, &s)
        } else {
            f(&self.realization, &self.stats)
        }
    }

    /// Spreads `symbols` (`L - 1` per subset) into a frame.
    fn spread_frame(&self, symbols: &[Complex64]) -> Result<ComplexFrame> {
        let l = self.cfg.l;
        let p = self.spreading.pilot_index();
        let pilot = PILOT_SYMBOL * self.cfg.boost.sqrt();
        if l == 1 {
            return map_chips(&vec![pilot; self.tiling.n_subsets()], &self.tiling);
        }
        let mut chips = Vec::with_capacity(l * self.tiling.n_subsets());
        for block in symbols.chunks_exact(l - 1) {
            let start = chips.len();
            chips.extend_from_slice(&block[..p]);
            chips.push(pilot);
            chips.extend_from_slice(&block[p..]);
            self.spreading.transform(&mut chips[start..]);
        }
        map_chips(&chips, &self.tiling)
    }

    fn propagate(
        &self,
        tx: &ComplexFrame,
        realization: &ChannelRealization,
        noise_var: f64,
        noise: &mut RngStream,
    ) -> Result<ComplexFrame> {
        match &self.modem {
            None => apply_channel_frequency(tx, realization, noise_var, noise),
            Some(modem) => {
                let sig = modem.modulate(tx)?;
                modem.demodulate(&apply_channel_time(&sig, realization, noise_var, noise))
            }
        }
    }

    fn data_symbols(&self, rng: &mut RngStream, n: usize) -> Result<Vec<Complex64>> {
        let m = self.cfg.constellation.bits_per_symbol();
        qam_map(&rng.bits(n * m), self.cfg.constellation)
    }

    /// Runs one frame at chip noise variance `noise_var` and counts
    /// post-decoder bit errors. Streams are keyed by `(point, frame)`.
    pub fn run_frame(&self, noise_var: f64, point: u64, frame: u64) -> Result<FrameOutcome> {
        let seed = self.cfg.master_seed;
        let mut data_rng = RngStream::spawn(seed, stream_id(StreamRole::Data, point, frame));
        let mut noise_rng = RngStream::spawn(seed, stream_id(StreamRole::Noise, point, frame));
        let layout = self.layout;

        let info = data_rng.bits(layout.info_bits);
        let mut coded = if self.cfg.uncoded {
            info.clone()
        } else {
            puncture(&conv_encode(&info), self.cfg.code_rate)
        };
        coded.resize(layout.capacity, 0);
        if let Some(il) = &self.interleaver {
            coded = il.interleave(&coded);
        }
        let symbols = qam_map(&coded, self.cfg.constellation)?;

        self.with_channel(frame, |realization, stats| {
            let demapper = Demapper::new(self.cfg.constellation);
            let mut llrs = Vec::with_capacity(layout.capacity);
            let mut erased = 0u64;
            if self.cfg.baseline_mode {
                let tx = ComplexFrame::from_cells(
                    self.cfg.n_symbols,
                    self.cfg.n_active_carriers,
                    symbols,
                )?;
                let rx = self.propagate(&tx, realization, noise_var, &mut noise_rng)?;
                for t in 0..rx.n_symbols() {
                    for (y, h) in rx.symbol(t).iter().zip(&realization.h) {
                        demapper.demap_into(
                            EqualizedSymbol {
                                value: y / h,
                                gain: Complex64::new(1.0, 0.0),
                                noise_var: noise_var / h.norm_sqr(),
                            },
                            &mut llrs,
                        );
                    }
                }
            } else {
                let tx = self.spread_frame(&symbols)?;
                let rx = self.propagate(&tx, realization, noise_var, &mut noise_rng)?;
                let chips = demap_chips(&rx, &self.tiling)?;
                let mut settings = EqualizerSettings {
                    mode: self.cfg.equalizer,
                    ..EqualizerSettings::zf(noise_var)
                };
                for (r, &(h_avg, var)) in chips.chunks_exact(self.cfg.l).zip(stats) {
                    let h_hat = if self.cfg.perfect_csi {
                        h_avg
                    } else {
                        estimate_subset(r, &self.spreading, PILOT_SYMBOL, self.cfg.boost)?.h_hat
                    };
                    if self.cfg.oracle_si {
                        settings.extra_var = si_variance(1.0, self.cfg.l, var);
                    }
                    let eq = equalize_subset(r, &self.spreading, h_hat, &settings)?;
                    erased += u64::from(eq.erased);
                    for s in eq.symbols {
                        demapper.demap_into(s, &mut llrs);
                    }
                }
            }

            if let Some(il) = &self.interleaver {
                llrs = il.deinterleave(&llrs);
            }
            let decoded = if self.cfg.uncoded {
                hard_decisions(&llrs)
            } else {
                let mother = depuncture(&llrs[..layout.sent], self.cfg.code_rate, 2 * layout.steps);
                Viterbi::new().decode(&mother)?
            };
            let errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
            Ok(FrameOutcome {
                info_bits: info.len() as u64,
                bit_errors: errors,
                erased_subsets: erased,
            })
        })
    }

    /// Runs one frame of random data and returns the channel estimation
    /// error statistics over all subsets.
    pub fn estimate_frame(&self, noise_var: f64, point: u64, frame: u64) -> Result<FrameMse> {
        let seed = self.cfg.master_seed;
        let mut data_rng = RngStream::spawn(seed, stream_id(StreamRole::Data, point, frame));
        let mut noise_rng = RngStream::spawn(seed, stream_id(StreamRole::Noise, point, frame));
        let n = self.tiling.n_subsets() * (self.cfg.l - 1);
        let symbols = self.data_symbols(&mut data_rng, n)?;
        let tx = self.spread_frame(&symbols)?;
        self.with_channel(frame, |realization, stats| {
            let rx = self.propagate(&tx, realization, noise_var, &mut noise_rng)?;
            let chips = demap_chips(&rx, &self.tiling)?;
            let mut out = FrameMse::default();
            for (r, &(h_avg, _)) in chips.chunks_exact(self.cfg.l).zip(stats) {
                let e = estimate_subset(r, &self.spreading, PILOT_SYMBOL, self.cfg.boost)?.h_hat
                    - h_avg;
                out.sq_error.push(e.norm_sqr());
                out.err_re.push(e.re);
                out.err_im.push(e.im);
            }
            Ok(out)
        })
    }

    /// Closed-form MSE averaged over the subsets of the fixed realization.
    pub fn predicted_mse(&self, noise_var: f64) -> f64 {
        let l = self.cfg.l;
        self.stats
            .iter()
            .map(|&(_, var)| theoretical_mse(self.cfg.boost, l, var, noise_var))
            .sum::<f64>()
            / self.stats.len() as f64
    }

    /// Mean of `((L-1)/L) sigma_h^2` over subsets.
    pub fn weighted_channel_variance(&self) -> f64 {
        let l = self.cfg.l as f64;
        self.stats
            .iter()
            .map(|&(_, v)| (l - 1.0) / l * v)
            .sum::<f64>()
            / self.stats.len() as f64
    }

    /// Mean subset variance `sigma_h^2` (no weighting).
    pub fn mean_channel_variance(&self) -> f64 {
        self.stats.iter().map(|&(_, v)| v).sum::<f64>() / self.stats.len() as f64
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Energy spent per data cell, including boosted pilots, relative to the
/// data energy: `(1 - d + d P) / (1 - d)` for pilot density `d` and pilot
/// power `P`. Density 1/12 and power 16/9 give 1.1616 (0.65 dB).
pub fn dvbt_pilot_power_loss(density: f64, pilot_power: f64) -> f64 {
    (1.0 - density + density * pilot_power) / (1.0 - density)
}
