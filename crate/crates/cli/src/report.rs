//! JSON metric reports and run manifests.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize, Serializer};
use tubal_core::metrics::{MetricReport, Psnr};

use crate::io::{write_atomic, IoError};

fn psnr_json<S: Serializer>(p: &Option<Psnr>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(Psnr::Finite(v)) => s.serialize_f64(*v),
        Some(Psnr::Infinite) => s.serialize_str("inf"),
        None => s.serialize_none(),
    }
}

/// `{psnr, ssim, rse, iterations, converged}`. The quality fields are null
/// when no ground truth was given; an infinite PSNR is the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(serialize_with = "psnr_json")]
    pub psnr: Option<Psnr>,
    pub ssim: Option<f64>,
    pub rse: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl RunReport {
    pub fn new(metrics: Option<MetricReport>, iterations: usize, converged: bool) -> Self {
        Self {
            psnr: metrics.map(|m| m.psnr),
            ssim: metrics.map(|m| m.ssim),
            rse: metrics.map(|m| m.rse),
            iterations,
            converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsJson {
    #[serde(serialize_with = "psnr_json")]
    pub psnr: Option<Psnr>,
    pub ssim: f64,
    pub rse: f64,
}

impl From<MetricReport> for MetricsJson {
    fn from(m: MetricReport) -> Self {
        Self { psnr: Some(m.psnr), ssim: m.ssim, rse: m.rse }
    }
}

/// Record of one command run, written next to its outputs. `argv` replays
/// the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<PathBuf>,
    /// Every setting the run used, defaults included.
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub duration_secs: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.to_owned(),
            argv: argv.to_vec(),
            inputs: Vec::new(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            duration_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    /// `<primary output>.manifest.json`.
    pub fn path_for(primary_output: &Path) -> PathBuf {
        let mut p = primary_output.as_os_str().to_owned();
        p.push(".manifest.json");
        PathBuf::from(p)
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.duration_secs = elapsed.as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serialises");
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}
