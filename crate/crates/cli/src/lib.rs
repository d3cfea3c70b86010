//! Command implementations behind the `mellin-sampler` binary.
//!
//! Each command reads a JSON config, computes, and returns its output files
//! in memory as an [`Outcome`]; [`write_outcome`] puts them on disk. The
//! effective config (after command-line overrides) is always among the
//! outputs as `config.json`, so a run can be repeated from its own output
//! directory.

pub mod config;
pub mod error;

mod bounds;
mod experiment;
mod synth;
mod verify;

use std::path::{Path, PathBuf};

pub use config::{
    BoundsConfig, BoundsGrid, ExperimentConfig, SynthConfig, VariantChoice, VerifyChecks, VerifyConfig, FORMAT_VERSION,
};
pub use error::{CliError, Result};
pub use verify::{verify_function, CheckResult, VerifyReport};

pub use bounds::{bounds_csv, BOUNDS_CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Verify,
    Experiment,
    Bounds,
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub variant: Option<VariantChoice>,
}

/// A file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Human-readable lines for standard output.
    pub summary: Vec<String>,
    /// Names of failed checks; a nonempty list means a nonzero exit.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.contents.as_str())
    }
}

/// Loads the config at `path` and runs `command` on it.
pub fn run(command: Command, path: &Path, overrides: &Overrides) -> Result<Outcome> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    match command {
        Command::Synth => synth::run(config::load(path)?, overrides),
        Command::Verify => verify::run(config::load(path)?, &base, overrides),
        Command::Experiment => experiment::run(config::load(path)?, overrides),
        Command::Bounds => bounds::run(config::load(path)?, overrides),
    }
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    outcome
        .artifacts
        .iter()
        .map(|a| {
            let path = dir.join(a.name);
            std::fs::write(&path, &a.contents).map_err(|e| CliError::write(&path, e))?;
            Ok(path)
        })
        .collect()
}

fn check_version(version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(CliError::Config(format!("unsupported format_version {version}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

/// Overrides that carry a paper/corrected choice set the run's variant.
fn single_variant(choice: VariantChoice) -> Option<mellin_sampling::Variant> {
    match choice {
        VariantChoice::Paper => Some(mellin_sampling::Variant::Paper),
        VariantChoice::Corrected => Some(mellin_sampling::Variant::Corrected),
        VariantChoice::Both => None,
    }
}
