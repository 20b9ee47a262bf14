//! Scenario runner behind the `nrwa` binary.
//!
//! `run` reads a scenario file, validates it, executes it and writes the CSV
//! series plus `manifest.json` into the output directory.

pub mod output;
pub mod scenarios;

use std::fmt;
use std::path::Path;
use std::time::Instant;

use nrwa_core::config::{validate_scenario, Scenario, ScenarioConfig};
use nrwa_core::PulseError;

use output::{OutDir, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Validation(Vec<String>),
    Numerical { stage: &'static str, source: PulseError },
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Numerical { .. } => EXIT_NUMERICAL,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(problems) => {
                write!(f, "validation failed")?;
                for p in problems {
                    write!(f, "\n  {p}")?;
                }
                Ok(())
            }
            Self::Numerical { stage, source } => write!(f, "numerical failure in {stage}: {source}"),
            Self::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Executes the scenario in `config_path`; `steps` overrides `grid.n_steps`.
pub fn run(config_path: &Path, out_dir: &Path, steps: Option<usize>) -> Result<RunManifest, RunError> {
    let mut config = ScenarioConfig::from_path(config_path).map_err(|e| RunError::Validation(vec![e.to_string()]))?;
    if steps.is_some() {
        config.grid.n_steps = steps;
    }
    let report = validate_scenario(&config);
    let Some(resolved) = report.resolved.clone() else {
        return Err(RunError::Validation(report.problems()));
    };

    let started = Instant::now();
    let mut out = OutDir::create(out_dir).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    let outcome = match resolved.scenario {
        Scenario::CdAllenEberly => scenarios::run_cd(&resolved, &mut out)?,
        Scenario::InvariantFew => scenarios::run_few(&resolved, &mut out)?,
        Scenario::InvariantMany => scenarios::run_many(&resolved, &mut out)?,
        Scenario::PropagateCustom => scenarios::run_custom(&resolved, &mut out)?,
    };

    let mut manifest = RunManifest {
        scenario: resolved.scenario.name().to_string(),
        comment: config.comment.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: resolved.parameters.clone(),
        grid: outcome.grid,
        wall_time_s: started.elapsed().as_secs_f64(),
        files: out.files().to_vec(),
        warnings: report.warnings.clone(),
        acceptance: outcome.checks,
    };
    manifest.files.push("manifest.json".into());
    out.write_json("manifest.json", &manifest).map_err(|e| RunError::Io(e.to_string()))?;
    for f in &manifest.files {
        let len = std::fs::metadata(out.path().join(f)).map(|m| m.len()).unwrap_or(0);
        if len == 0 {
            return Err(RunError::Io(format!("output `{f}` is missing or empty")));
        }
    }
    Ok(manifest)
}
