//! Optional `key = value` defaults file. Flags always win.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub latent_dim: Option<usize>,
    pub alpha: Option<f64>,
    pub burnin: Option<usize>,
    pub samples: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub layers: Option<String>,
    pub heldout_fraction: Option<f64>,
    pub n_repeats: Option<usize>,
    pub l2g_threshold: Option<f64>,
    pub threshold: Option<f64>,
    pub threads: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("--config {}: {e}", path.display())))
    }
}
