//! Experiment runner behind the `warped-limit-lab` binary.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig, PChoice, UsageError};
pub use output::Summary;

use warped_limit_core::Error as CoreError;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Runs one experiment, writing its artifacts and `summary.json` into the
/// configured output directory.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunOutcome> {
    output::ensure_dir(&cfg.out_dir).map_err(|e| UsageError(format!("{e:#}")))?;
    let mut artifacts = experiments::Artifacts::new(&cfg.out_dir);
    let summary = experiments::run_experiment(cfg, &mut artifacts)?;
    let mut files = artifacts.files;
    files.push(output::write_json(&cfg.out_dir, "summary.json", &summary)?);
    Ok(RunOutcome { summary, files })
}

pub const EXIT_PASS: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

/// Exit status for a failed run: usage and parameter errors give 2,
/// numerical failures give 3.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Domain(_) | CoreError::InvalidParameter(_) | CoreError::Precondition(_) => EXIT_USAGE,
                CoreError::NoTurningArc { .. }
                | CoreError::DegenerateRadial
                | CoreError::Quadrature { .. }
                | CoreError::Solver(_) => EXIT_SOLVER,
            };
        }
    }
    EXIT_SOLVER
}
