use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "PSECTOR_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "psector-out";

/// Defaults read from `--config`; flags override every field.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub n_r: Option<usize>,
    pub n_phi: Option<usize>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub eps_reg: Option<f64>,
    pub max_iterations: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub walks: Option<usize>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: CliConfig =
            toml::from_str(&text).map_err(|e| format!("invalid config {}: {}", path.display(), e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        for (name, v) in [("n_r", self.n_r), ("n_phi", self.n_phi)] {
            if matches!(v, Some(n) if n < 8) {
                return Err(format!("{name} must be >= 8"));
            }
        }
        if matches!(self.samples, Some(n) if n < 16) {
            return Err("samples must be >= 16".into());
        }
        for (name, v) in [("tolerance", self.tolerance), ("eps_reg", self.eps_reg)] {
            if matches!(v, Some(x) if x.is_nan() || x <= 0.0) {
                return Err(format!("{name} must be > 0"));
            }
        }
        if matches!(self.max_iterations, Some(0)) || matches!(self.walks, Some(0)) {
            return Err("max_iterations and walks must be >= 1".into());
        }
        Ok(())
    }

    /// Flag, then environment, then config file, then the default.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}
