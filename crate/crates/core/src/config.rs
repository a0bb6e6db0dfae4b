//! JSON configuration of a `fit` run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{CsvLayout, PanelData};
use crate::error::{Error, Result};
use crate::inference::{ModelSpec, SamplerConfig};

/// Input file and column layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    /// Long CSV; relative paths resolve against the config file.
    pub path: PathBuf,
    #[serde(default)]
    pub layout: CsvLayout,
}

/// One `fit` invocation: data, model, sampler settings and outputs.
///
/// `model` is 1 (observation-level covariates only) or 2 (adds the
/// individual-level covariates listed in the layout).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "model_one")]
    pub model: u8,
    #[serde(default)]
    pub spec: ModelSpec,
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub data: DataSource,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "one_replicate")]
    pub replicates: usize,
}

fn model_one() -> u8 {
    1
}

fn one_replicate() -> usize {
    1
}

impl FitConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut c: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        c.normalise()?;
        Ok(c)
    }

    /// Read a config file, resolving the data path against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut c = Self::from_json(&text)?;
        if c.data.path.is_relative() {
            if let Some(dir) = path.parent() {
                c.data.path = dir.join(&c.data.path);
            }
        }
        Ok(c)
    }

    fn normalise(&mut self) -> Result<()> {
        match self.model {
            1 => self.spec.individual_covariates = false,
            2 => {
                if self.data.layout.individual_covariates.is_empty() {
                    return Err(Error::config("model 2 needs individual_covariates in the data layout"));
                }
                self.spec.individual_covariates = true;
            }
            m => return Err(Error::config(format!("model must be 1 or 2, got {m}"))),
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        self.spec.validate()?;
        self.sampler.validate()
    }

    pub fn load_data(&self) -> Result<PanelData> {
        let f = fs::File::open(&self.data.path)
            .map_err(|e| Error::config(format!("cannot open data file {}: {e}", self.data.path.display())))?;
        PanelData::read_csv(f, &self.data.layout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = FitConfig::from_json(r#"{"data":{"path":"d.csv","layout":{"outcomes":["a","b"]}}}"#).unwrap();
        assert_eq!((c.model, c.replicates), (1, 1));
        assert_eq!(c.sampler, SamplerConfig::default());
        assert!(!c.spec.individual_covariates);
    }

    #[test]
    fn model_two_sets_flag() {
        let c = FitConfig::from_json(
            r#"{"model":2,"data":{"path":"d.csv","layout":{"outcomes":["a"],"individual_covariates":["z"]}}}"#,
        )
        .unwrap();
        assert!(c.spec.individual_covariates);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"data":{"path":"d.csv"},"extra":1}"#,
            r#"{"model":3,"data":{"path":"d.csv"}}"#,
            r#"{"model":2,"data":{"path":"d.csv"}}"#,
            r#"{"replicates":0,"data":{"path":"d.csv"}}"#,
            r#"{"sampler":{"iterations":10,"burn_in":10},"data":{"path":"d.csv"}}"#,
            r#"{"sampler":{"iterations":"many"},"data":{"path":"d.csv"}}"#,
        ];
        for b in bad {
            let e = FitConfig::from_json(b).unwrap_err();
            assert!(e.is_config_error(), "{b}: {e}");
        }
    }

    #[test]
    fn relative_data_path_resolves_against_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        fs::write(&p, r#"{"data":{"path":"d.csv"}}"#).unwrap();
        let c = FitConfig::from_path(&p).unwrap();
        assert_eq!(c.data.path, dir.path().join("d.csv"));
    }
}
