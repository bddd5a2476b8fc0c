//! Monte Carlo experiments, reports and the parallel scheduler.

pub mod ber;
pub mod bitrate;
pub mod link;
pub mod mse;
pub mod report;
pub mod runner;
pub mod stats;

pub use link::{FrameMse, FrameOutcome, Link};
pub use report::{emit_report, ExperimentReport, Record, ReportFormat};
pub use runner::Runner;
