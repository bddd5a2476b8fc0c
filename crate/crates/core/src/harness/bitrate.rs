//! Useful (post-FEC) bit rate.

use crate::config::{CodeRate, Constellation, LinkConfig};
use crate::harness::report::{ExperimentReport, Record};

/// Outer Reed-Solomon (204, 188) code rate. Only enters the bit rate; the
/// outer code is not simulated.
pub const RS_RATE: f64 = 188.0 / 204.0;

/// `R = N_data * m * Rc * (188/204) * rho_pilot / T_s` in Mbit/s.
///
/// LP-OFDM: `N_data = n_active_carriers`, `rho_pilot = (L-1)/L`.
/// Classical baseline (`baseline_mode`): `N_data = dvbt_data_carriers`,
/// `rho_pilot = 1` (pilots are already excluded from the data carriers).
pub fn useful_bitrate(cfg: &LinkConfig) -> f64 {
    let m = cfg.constellation.bits_per_symbol() as f64;
    let rc = cfg.code_rate.value();
    let (n_data, rho) = if cfg.baseline_mode {
        (cfg.dvbt_data_carriers as f64, 1.0)
    } else {
        let l = (cfg.lt * cfg.lf) as f64;
        (cfg.n_active_carriers as f64, (l - 1.0) / l)
    };
    n_data * m * rc * RS_RATE * rho / cfg.symbol_duration() / 1e6
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitrateRow {
    pub system: String,
    pub constellation: Constellation,
    pub code_rate: CodeRate,
    pub l: Option<usize>,
    pub mbps: f64,
}

/// The eight published operating points: the classical system at
/// 16QAM 3/4 and 64QAM 5/6, and LP-OFDM at L = 16, 32, 64 for each.
pub fn bitrate_table(base: &LinkConfig) -> Vec<BitrateRow> {
    let mut rows = Vec::new();
    let modes = [
        (Constellation::Qam16, CodeRate::R34),
        (Constellation::Qam64, CodeRate::R56),
    ];
    for (constellation, code_rate) in modes {
        let cfg = LinkConfig {
            constellation,
            code_rate,
            baseline_mode: true,
            ..base.clone()
        };
        rows.push(BitrateRow {
            system: "dvb-t".into(),
            constellation,
            code_rate,
            l: None,
            mbps: useful_bitrate(&cfg),
        });
    }
    for (constellation, code_rate) in modes {
        for l in [16, 32, 64] {
            let cfg = LinkConfig {
                constellation,
                code_rate,
                baseline_mode: false,
                lt: l / 2,
                lf: 2,
                l,
                ..base.clone()
            };
            rows.push(BitrateRow {
                system: "lp-ofdm".into(),
                constellation,
                code_rate,
                l: Some(l),
                mbps: useful_bitrate(&cfg),
            });
        }
    }
    rows
}

/// The bit-rate table as a report, one curve per system and constellation,
/// `x` = L (0 for the classical system).
pub fn bitrate_report(base: &LinkConfig) -> ExperimentReport {
    let mut report = ExperimentReport::new();
    report.meta("experiment", "bitrate");
    report.meta("units", "Mbit/s");
    report.meta(
        "formula",
        "R = N_data * m * Rc * (188/204) * rho_pilot / T_s",
    );
    for row in bitrate_table(base) {
        report.records.push(Record {
            curve: format!("{} {} {}", row.system, row.constellation, row.code_rate),
            x: row.l.unwrap_or(0) as f64,
            value: row.mbps,
            predicted: None,
            trials: 1,
            samples: 1,
            errors: None,
            ci95: 0.0,
            reliable: true,
        });
    }
    report
}
