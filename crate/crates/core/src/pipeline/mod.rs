//! Config-driven experiment runner and report writer.

mod config;
mod emit;
mod report;
mod run;
mod svg;

use crate::error::Result;

pub use config::{EvalConfig, Mode, OutputConfig, PipelineConfig};
pub use emit::{emit_reports, metrics_csv, write_atomic};
pub use report::{CalibrationLog, ChainLog, ConfusionRecord, Environment, IqrLog, RunReport, StageLog};
pub use run::{execute, Artifact, RunOutput};
pub use svg::render_svg;

/// Caps the global rayon pool at `HEPAFLOW_THREADS` when set. Later calls
/// (or a pool that already exists) leave the pool unchanged.
pub fn init_threads() {
    if let Some(n) = std::env::var("HEPAFLOW_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs the experiment and writes every report file to the configured
/// output directory.
pub fn run(cfg: &PipelineConfig) -> Result<RunReport> {
    init_threads();
    let output = execute(cfg)?;
    emit_reports(&output, &cfg.output_dir).map_err(|e| e.in_stage("emit"))
}
