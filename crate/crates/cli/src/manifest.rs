use std::path::Path;

use serde::Serialize;

use lmsurf_core::config::RunConfig;
use lmsurf_core::pipeline::Metrics;
use lmsurf_core::MediumReport;

/// Record of one `simulate` invocation.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub config_path: Option<String>,
    pub preset: &'a str,
    pub parameters: &'a RunConfig,
    pub medium: &'a MediumReport,
    /// SHA-256 of the canonical resolved parameters.
    pub content_hash: String,
    pub steps: u64,
    pub dt_s: f64,
    pub duration_s: f64,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub metrics: &'a Metrics,
}

pub fn write(manifest: &RunManifest, path: &Path) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")
}
