//! Config ingestion, scenario dispatch and deterministic output.

mod config;
mod run;
mod timeseries;

use std::io;
use std::path::{Path, PathBuf};
use std::thread;

use thiserror::Error;

pub use config::{
    parse_config, BatchConfig, ConfigError, InitialState, Key, KeyKind, OutputFormat,
    ScenarioConfig, ScenarioKind,
};
pub use run::{run_scenario, ScenarioError};
pub use timeseries::TimeSeries;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] ScenarioError),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 config, 3 numerical validity, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

/// What one finished scenario wrote.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub kind: ScenarioKind,
    pub path: PathBuf,
    pub rows: usize,
    pub warnings: usize,
}

impl BatchConfig {
    /// Forces every scenario to `format`, swapping output extensions to match.
    pub fn with_format(mut self, format: OutputFormat) -> Result<Self, ConfigError> {
        for s in &mut self.scenarios {
            if s.format != format {
                s.format = format;
                s.output.set_extension(format.extension());
            }
        }
        for (i, a) in self.scenarios.iter().enumerate() {
            if let Some(b) = self.scenarios[i + 1..]
                .iter()
                .find(|b| b.output == a.output)
            {
                return Err(ConfigError::DuplicateOutput {
                    first: a.name.clone(),
                    second: b.name.clone(),
                    path: a.output.display().to_string(),
                });
            }
        }
        Ok(self)
    }
}

fn run_one(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let ts = run_scenario(cfg)?;
    let path = out_dir.join(&cfg.output);
    let io_err = |source| RunError::Io {
        path: path.clone(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    ts.emit(cfg.format, &path).map_err(io_err)?;
    let warnings = ts
        .metadata()
        .get("warnings")
        .and_then(|w| w.as_array())
        .map_or(0, |w| w.len());
    Ok(RunSummary {
        name: cfg.name.clone(),
        kind: cfg.kind,
        path,
        rows: ts.len(),
        warnings,
    })
}

/// Runs every scenario concurrently, one thread each, writing under
/// `out_dir`. Summaries come back in scenario-name order; on failure the
/// error of the first failing scenario in that order is returned.
pub fn run_batch(batch: &BatchConfig, out_dir: &Path) -> Result<Vec<RunSummary>, RunError> {
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = batch
            .scenarios
            .iter()
            .map(|cfg| s.spawn(move || run_one(cfg, out_dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}
