use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpofdm::config::{ChannelId, CodeRate, Constellation};
use lpofdm::harness::ber::{run_ber_experiment, sweep_boost};
use lpofdm::harness::bitrate::bitrate_report;
use lpofdm::harness::mse::{run_mse_experiment, run_weighted_variance};
use lpofdm::harness::{emit_report, ExperimentReport, ReportFormat, Runner};
use lpofdm::LinkConfig;

#[derive(Parser, Debug)]
#[command(
    name = "lpofdm",
    version,
    about = "2D linearly precoded OFDM link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Key = value configuration file. Defaults are used for missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// csv, or svg (writes the CSV too).
    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormat,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[arg(long, global = true)]
    lt: Option<usize>,

    #[arg(long, global = true)]
    lf: Option<usize>,

    #[arg(long, global = true)]
    boost: Option<f64>,

    /// f1, p1, flat, or a tap file path.
    #[arg(long, global = true)]
    channel: Option<ChannelId>,

    /// 1/2, 3/4 or 5/6.
    #[arg(long, global = true)]
    rate: Option<CodeRate>,

    /// 16qam or 64qam.
    #[arg(long, global = true)]
    qam: Option<Constellation>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimation MSE against SNR for several frequency spreading lengths.
    Mse {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        lf_list: Vec<usize>,
        /// SNR grid in dB; defaults to the config's grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snr: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4)]
        frames: usize,
    },
    /// Weighted channel variance for several frequency spreading lengths.
    Variance {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        lf_list: Vec<usize>,
    },
    /// Post-decoder BER against Eb/N0.
    Ber {
        /// Eb/N0 grid in dB; defaults to the config's grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        ebn0: Option<Vec<f64>>,
        /// Simulate the classical system with perfect CSI instead.
        #[arg(long)]
        baseline: bool,
    },
    /// BER at one Eb/N0 over a grid of pilot boosts.
    BoostSweep {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        boosts: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        ebn0: f64,
    },
    /// Useful bit rates of the published operating points.
    Bitrate,
}

fn build_config(c: &Common) -> lpofdm::Result<LinkConfig> {
    let mut cfg = match &c.config {
        Some(path) => LinkConfig::load(path)?,
        None => LinkConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.master_seed = seed;
    }
    if let Some(lt) = c.lt {
        cfg.lt = lt;
        cfg.l = 0;
    }
    if let Some(lf) = c.lf {
        cfg.lf = lf;
        cfg.l = 0;
    }
    if let Some(b) = c.boost {
        cfg.boost = b;
    }
    if let Some(ch) = &c.channel {
        cfg.channel = ch.clone();
    }
    if let Some(r) = c.rate {
        cfg.code_rate = r;
    }
    if let Some(q) = c.qam {
        cfg.constellation = q;
    }
    cfg.validate()
}

fn run(cli: &Cli) -> lpofdm::Result<ExperimentReport> {
    let cfg = build_config(&cli.common)?;
    let runner = Runner::new(cli.common.workers);
    match &cli.command {
        Command::Mse {
            lf_list,
            snr,
            frames,
        } => {
            let grid = snr.clone().unwrap_or_else(|| cfg.snr_grid.clone());
            run_mse_experiment(&cfg, lf_list, &grid, *frames, &runner)
        }
        Command::Variance { lf_list } => run_weighted_variance(&cfg, lf_list),
        Command::Ber { ebn0, baseline } => {
            let grid = ebn0.clone().unwrap_or_else(|| cfg.snr_grid.clone());
            let cfg = LinkConfig {
                baseline_mode: cfg.baseline_mode || *baseline,
                ..cfg
            };
            run_ber_experiment(&cfg, &grid, &runner)
        }
        Command::BoostSweep { boosts, ebn0 } => {
            let (best, report) = sweep_boost(&cfg, boosts, *ebn0, &runner)?;
            println!("best boost: {best}");
            Ok(report)
        }
        Command::Bitrate => {
            let report = bitrate_report(&cfg);
            for r in &report.records {
                println!("{:<24} L={:<3} {:>6.2} Mbit/s", r.curve, r.x, r.value);
            }
            Ok(report)
        }
    }
}

fn stem(cmd: &Command) -> &'static str {
    match cmd {
        Command::Mse { .. } => "mse",
        Command::Variance { .. } => "variance",
        Command::Ber { .. } => "ber",
        Command::BoostSweep { .. } => "boost_sweep",
        Command::Bitrate => "bitrate",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config() { 2 } else { 1 });
        }
    };
    match emit_report(
        &report,
        &cli.common.out_dir,
        stem(&cli.command),
        cli.common.format,
    ) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    for (k, v) in &report.metadata {
        if k == "warning" {
            eprintln!("warning: {v}");
        }
    }
    if report.has_unreliable() {
        eprintln!("warning: some points have too few errors to be reliable");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
