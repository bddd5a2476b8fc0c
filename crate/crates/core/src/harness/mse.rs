//! Channel-estimation MSE experiments.

use num_complex::Complex64;

use crate::config::{Constellation, LinkConfig};
use crate::error::Result;
use crate::estimator::{estimate_subset, theoretical_mse};
use crate::fec::qam_map;
use crate::harness::link::{Link, PILOT_SYMBOL};
use crate::harness::report::{ExperimentReport, Record};
use crate::harness::runner::Runner;
use crate::harness::stats::Moments;
use crate::precode::SpreadingMatrix;
use crate::rng::{stream_id, RngStream, StreamRole};

/// Empirical MSE of the estimator per `(Lf, SNR)` over `frames` frames of
/// the configured channel, next to the closed-form prediction using each
/// subset's measured variance.
pub fn run_mse_experiment(
    cfg: &LinkConfig,
    lf_list: &[usize],
    snr_grid: &[f64],
    frames: usize,
    runner: &Runner,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new();
    let mut first = true;
    for &lf in lf_list {
        let link = Link::new(LinkConfig {
            lf,
            l: 0,
            ..cfg.clone()
        })?;
        if first {
            describe(&mut report, &link, "mse");
            first = false;
        }
        for (k, &snr) in snr_grid.iter().enumerate() {
            let nv = link.noise_var_for_snr(snr);
            let parts = runner.map(0..frames, |f| link.estimate_frame(nv, k as u64, f as u64));
            let mut sq = Moments::default();
            for p in parts {
                sq.merge(&p?.sq_error);
            }
            report.records.push(Record {
                curve: format!("Lf={lf}"),
                x: snr,
                value: sq.mean(),
                predicted: Some(link.predicted_mse(nv)),
                trials: frames as u64,
                samples: sq.count,
                errors: None,
                ci95: sq.ci95(),
                reliable: true,
            });
        }
    }
    Ok(report)
}

/// Weighted channel variance `((L-1)/L) sigma_h^2`, averaged over subsets,
/// per `Lf`. This is the high-SNR MSE floor the closed form predicts.
pub fn run_weighted_variance(cfg: &LinkConfig, lf_list: &[usize]) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new();
    for (n, &lf) in lf_list.iter().enumerate() {
        let link = Link::new(LinkConfig {
            lf,
            l: 0,
            ..cfg.clone()
        })?;
        if n == 0 {
            describe(&mut report, &link, "variance");
        }
        report.records.push(Record {
            curve: "weighted_variance".into(),
            x: lf as f64,
            value: link.weighted_channel_variance(),
            predicted: None,
            trials: 1,
            samples: link.subset_stats().len() as u64,
            errors: None,
            ci95: 0.0,
            reliable: true,
        });
    }
    Ok(report)
}

fn describe(report: &mut ExperimentReport, link: &Link, experiment: &str) {
    let cfg = link.config();
    report.meta("experiment", experiment);
    report.meta("master_seed", cfg.master_seed);
    report.meta("channel", &cfg.channel);
    report.meta("tap_hash", &link.taps().content_hash);
    report.meta("snr_convention", link.snr_convention());
    report.meta("config", cfg.serialize().trim_end().replace('\n', "; "));
}

/// Synthetic subset channel: `h_j = h0 + e_j`, `e_j ~ CN(0, variance)`
/// drawn independently per chip and per trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticChannel {
    pub mean: Complex64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSetup {
    pub l: usize,
    pub boost: f64,
    pub channel: SyntheticChannel,
    pub noise_var: f64,
}

impl SyntheticSetup {
    pub fn predicted_mse(&self) -> f64 {
        theoretical_mse(self.boost, self.l, self.channel.variance, self.noise_var)
    }
}

/// Estimation error statistics from synthetic subset trials. The error
/// `h_hat - h_avg` is split by linearity into the part caused by the data
/// (noise off) and the part caused by noise (data off).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SyntheticMse {
    pub total: Moments,
    pub interference: Moments,
    pub noise: Moments,
    pub err_re: Moments,
    pub err_im: Moments,
}

impl SyntheticMse {
    fn merge(&mut self, o: &SyntheticMse) {
        self.total.merge(&o.total);
        self.interference.merge(&o.interference);
        self.noise.merge(&o.noise);
        self.err_re.merge(&o.err_re);
        self.err_im.merge(&o.err_im);
    }
}

const SYNTHETIC_BLOCK: usize = 4096;

/// Runs `trials` independent subset trials with 16QAM data, split into
/// fixed blocks so the result does not depend on the worker count.
pub fn run_synthetic_mse(
    setup: &SyntheticSetup,
    trials: usize,
    seed: u64,
    point: u64,
    runner: &Runner,
) -> Result<SyntheticMse> {
    let c = SpreadingMatrix::new(setup.l, 0)?;
    let blocks = trials.div_ceil(SYNTHETIC_BLOCK);
    let parts = runner.map(0..blocks, |b| {
        let n = SYNTHETIC_BLOCK.min(trials - b * SYNTHETIC_BLOCK);
        synthetic_block(setup, &c, n, seed, point, b as u64)
    });
    let mut out = SyntheticMse::default();
    for p in parts {
        out.merge(&p?);
    }
    Ok(out)
}

fn synthetic_block(
    setup: &SyntheticSetup,
    c: &SpreadingMatrix,
    n: usize,
    seed: u64,
    point: u64,
    block: u64,
) -> Result<SyntheticMse> {
    let l = setup.l;
    let mut data_rng = RngStream::spawn(seed, stream_id(StreamRole::Data, point, block));
    let mut chan_rng = RngStream::spawn(seed, stream_id(StreamRole::Channel, point, block));
    let mut noise_rng = RngStream::spawn(seed, stream_id(StreamRole::Noise, point, block));
    let m = Constellation::Qam16.bits_per_symbol();
    let mut out = SyntheticMse::default();
    let mut s = vec![Complex64::new(0.0, 0.0); l];
    let mut r = vec![Complex64::new(0.0, 0.0); l];
    let mut h = vec![Complex64::new(0.0, 0.0); l];
    let mut w = vec![Complex64::new(0.0, 0.0); l];
    for _ in 0..n {
        let data = qam_map(&data_rng.bits((l - 1) * m), Constellation::Qam16)?;
        s[0] = PILOT_SYMBOL * setup.boost.sqrt();
        s[1..].copy_from_slice(&data);
        c.transform(&mut s);
        for hj in h.iter_mut() {
            *hj = setup.channel.mean + chan_rng.complex_gaussian(setup.channel.variance);
        }
        let h_avg = h.iter().sum::<Complex64>() / l as f64;
        for j in 0..l {
            r[j] = h[j] * s[j];
            w[j] = noise_rng.complex_gaussian(setup.noise_var);
        }
        let e_si = estimate_subset(&r, c, PILOT_SYMBOL, setup.boost)?.h_hat - h_avg;
        let e_n = estimate_subset(&w, c, PILOT_SYMBOL, setup.boost)?.h_hat;
        let e = e_si + e_n;
        out.total.push(e.norm_sqr());
        out.interference.push(e_si.norm_sqr());
        out.noise.push(e_n.norm_sqr());
        out.err_re.push(e.re);
        out.err_im.push(e.im);
    }
    Ok(out)
}
