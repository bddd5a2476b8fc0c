//! Post-decoder BER experiments and the boost search.

use crate::config::LinkConfig;
use crate::error::Result;
use crate::harness::link::Link;
use crate::harness::report::{ExperimentReport, Record};
use crate::harness::runner::Runner;
use crate::harness::stats::binomial_ci95;

/// Frames simulated between two checks of the stopping rule. Fixed so the
/// number of frames per point does not depend on the worker count.
pub const FRAME_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    pub reliable: bool,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.bits as f64
    }

    pub fn ci95(&self) -> f64 {
        binomial_ci95(self.errors, self.bits)
    }
}

/// Simulates frames at one Eb/N0 until `min_errors` bit errors or
/// `max_bits` information bits, whichever comes first.
///
/// Frame `f` always uses the same data and noise streams, whatever the
/// Eb/N0, so neighbouring points and configurations share random numbers.
pub fn run_ber_point(link: &Link, ebn0_db: f64, runner: &Runner) -> Result<BerPoint> {
    let cfg = link.config();
    let nv = link.noise_var_for_ebn0(ebn0_db);
    let (mut frames, mut bits, mut errors) = (0usize, 0u64, 0u64);
    while errors < cfg.min_errors && bits < cfg.max_bits {
        let outcomes = runner.map(frames..frames + FRAME_BATCH, |f| {
            link.run_frame(nv, 0, f as u64)
        });
        for o in outcomes {
            let o = o?;
            bits += o.info_bits;
            errors += o.bit_errors;
        }
        frames += FRAME_BATCH;
    }
    Ok(BerPoint {
        ebn0_db,
        frames: frames as u64,
        bits,
        errors,
        reliable: errors >= cfg.min_reliable_errors,
    })
}

/// Short curve label describing the system.
pub fn system_label(cfg: &LinkConfig) -> String {
    if cfg.baseline_mode {
        format!("baseline {} {}", cfg.constellation, cfg.code_rate)
    } else {
        format!("Lt={} Lf={} B={}", cfg.lt, cfg.lf, cfg.boost)
    }
}

pub fn ber_record(curve: &str, x: f64, p: &BerPoint) -> Record {
    Record {
        curve: curve.to_string(),
        x,
        value: p.ber(),
        predicted: None,
        trials: p.frames,
        samples: p.bits,
        errors: Some(p.errors),
        ci95: p.ci95(),
        reliable: p.reliable,
    }
}

fn describe(report: &mut ExperimentReport, link: &Link, experiment: &str) {
    let cfg = link.config();
    report.meta("experiment", experiment);
    report.meta("master_seed", cfg.master_seed);
    report.meta("channel", &cfg.channel);
    report.meta("tap_hash", &link.taps().content_hash);
    report.meta("ebn0_convention", link.ebn0_convention());
    report.meta(
        "stopping_rule",
        format!(
            "{} errors or {} bits; < {} errors flagged unreliable",
            cfg.min_errors, cfg.max_bits, cfg.min_reliable_errors
        ),
    );
    report.meta("config", cfg.serialize().trim_end().replace('\n', "; "));
    for w in link.warnings() {
        report.meta("warning", w);
    }
}

/// BER against Eb/N0 for one configuration.
pub fn run_ber_experiment(
    cfg: &LinkConfig,
    ebn0_grid: &[f64],
    runner: &Runner,
) -> Result<ExperimentReport> {
    let link = Link::new(cfg.clone())?;
    let mut report = ExperimentReport::new();
    describe(&mut report, &link, "ber");
    let label = system_label(link.config());
    for &x in ebn0_grid {
        let p = run_ber_point(&link, x, runner)?;
        report.records.push(ber_record(&label, x, &p));
    }
    Ok(report)
}

/// BER at a single Eb/N0 for each boost in `boosts`. Returns the boost with
/// the lowest BER; ties go to the smaller boost.
pub fn sweep_boost(
    cfg: &LinkConfig,
    boosts: &[f64],
    ebn0_db: f64,
    runner: &Runner,
) -> Result<(f64, ExperimentReport)> {
    let mut report = ExperimentReport::new();
    let mut best: Option<(f64, f64)> = None;
    let mut sorted = boosts.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    for (n, &b) in sorted.iter().enumerate() {
        let link = Link::new(LinkConfig {
            boost: b,
            ..cfg.clone()
        })?;
        if n == 0 {
            describe(&mut report, &link, "boost-sweep");
            report.meta("ebn0_db", ebn0_db);
        }
        let p = run_ber_point(&link, ebn0_db, runner)?;
        report.records.push(ber_record("boost", b, &p));
        if best.is_none_or(|(_, ber)| p.ber() < ber) {
            best = Some((b, p.ber()));
        }
    }
    let best_b = best.map(|(b, _)| b).unwrap_or(cfg.boost);
    report.meta("best_boost", best_b);
    Ok((best_b, report))
}

/// Eb/N0 at which a BER curve first falls to `target`, interpolating
/// linearly in `(x, log10 BER)` between the two bracketing points. Points
/// with zero errors count as below any positive target.
pub fn required_ebn0(records: &[&Record], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = records.iter().map(|r| (r.x, r.value)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 < target {
            if y1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    match pts.first() {
        Some(&(x, y)) if y < target => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChannelId;

    fn rec(x: f64, value: f64) -> Record {
        Record {
            curve: "c".into(),
            x,
            value,
            predicted: None,
            trials: 1,
            samples: 1,
            errors: None,
            ci95: 0.0,
            reliable: true,
        }
    }

    #[test]
    fn interpolation() {
        let rs = [rec(0.0, 1e-1), rec(1.0, 1e-2), rec(2.0, 1e-4)];
        let refs: Vec<&Record> = rs.iter().collect();
        assert!((required_ebn0(&refs, 1e-3).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(required_ebn0(&refs, 1e-2), Some(1.0 + 0.0));
        assert_eq!(required_ebn0(&refs, 1e-6), None);
        assert_eq!(required_ebn0(&refs, 1.0), Some(0.0));
    }

    fn tiny() -> LinkConfig {
        LinkConfig {
            lt: 2,
            lf: 2,
            l: 0,
            n_symbols: 4,
            n_active_carriers: 128,
            fft_size: 256,
            guard_samples: 64,
            channel: ChannelId::Flat,
            min_errors: 10,
            max_bits: 20_000,
            ..LinkConfig::default()
        }
    }

    #[test]
    fn single_boost_grid() {
        let (b, rep) = sweep_boost(&tiny(), &[1.0], 8.0, &Runner::new(1)).unwrap();
        assert_eq!(b, 1.0);
        assert_eq!(rep.records.len(), 1);
    }

    #[test]
    fn ties_go_to_smaller_boost() {
        let (b, rep) = sweep_boost(&tiny(), &[4.0, 2.0, 1.0], 40.0, &Runner::new(2)).unwrap();
        assert!(rep.records.iter().all(|r| r.errors == Some(0)));
        assert_eq!(b, 1.0);
        assert!(rep.has_unreliable());
    }

    #[test]
    fn stopping_rule() {
        let link = Link::new(tiny()).unwrap();
        let p = run_ber_point(&link, -2.0, &Runner::new(2)).unwrap();
        assert!(p.errors >= 10);
        assert_eq!(p.frames % FRAME_BATCH as u64, 0);
        assert!(p.reliable);
    }
}
