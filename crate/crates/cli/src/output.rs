//! Report envelopes and output destinations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use qcmi::synthgen::RNG_ALGORITHM;
use serde::Serialize;

use crate::config::RunConfig;

pub const OUTPUT_DIR_ENV: &str = "QCMI_OUTPUT_DIR";

/// Metadata wrapped around every JSON result.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub rng: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub duration_secs: f64,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, duration: Duration, result: T) -> Self {
        Envelope {
            tool: "qcmi",
            version: qcmi::VERSION,
            rng: RNG_ALGORITHM,
            status: "ok",
            error: None,
            duration_secs: duration.as_secs_f64(),
            config,
            result,
        }
    }

    pub fn failed(mut self, error: String) -> Self {
        self.status = "failed";
        self.error = Some(error);
        self
    }
}

/// Where a command writes: an explicit path, `$QCMI_OUTPUT_DIR/<default>`,
/// or stdout.
pub fn resolve_path(config: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &config.output().path {
        return Some(p.clone());
    }
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(config.default_file_name()))
}

pub fn open(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `# key: value` preamble for CSV reports.
pub fn csv_preamble(out: &mut dyn Write, config: &RunConfig) -> Result<()> {
    writeln!(out, "# tool: qcmi {}", qcmi::VERSION)?;
    writeln!(out, "# rng: {RNG_ALGORITHM}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
