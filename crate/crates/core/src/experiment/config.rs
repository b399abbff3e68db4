use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::noise::Noise;
use crate::threshold::DescriptorParams;

/// How images are routed to the training and test roles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitPolicy {
    /// Per class, a seeded random half for training and the rest for testing,
    /// drawn `partitions` times.
    RandomHalf {
        #[serde(default = "default_partitions")]
        partitions: usize,
    },
    /// A `path,role` CSV (role `train` or `test`); a path may appear under both roles.
    Manifest { path: PathBuf },
    /// A `path,group` CSV; each group in turn is the test set and all other
    /// listed images train.
    GroupOut { path: PathBuf },
}

fn default_partitions() -> usize {
    100
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy::RandomHalf {
            partitions: default_partitions(),
        }
    }
}

fn default_trials() -> usize {
    10
}

fn default_k() -> usize {
    1
}

fn default_max_window() -> usize {
    DescriptorParams::default().max_window
}

/// One experiment, as read from a JSON document. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset root laid out as `<class>/<image>.pgm`.
    pub dataset: PathBuf,
    #[serde(default)]
    pub descriptor: Descriptor,
    #[serde(default = "default_max_window")]
    pub max_window: usize,
    /// Degradations applied to test images (and retrieval queries).
    #[serde(default)]
    pub noise: Vec<Noise>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub split: SplitPolicy,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            descriptor: Descriptor::default(),
            max_window: default_max_window(),
            noise: Vec::new(),
            trials: default_trials(),
            split: SplitPolicy::default(),
            k: default_k(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> DescriptorParams {
        DescriptorParams {
            max_window: self.max_window,
        }
    }

    /// Checks every field that does not need the dataset itself.
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.k == 0 || self.k.is_multiple_of(2) {
            return Err(Error::Config(format!("k = {} must be odd and positive", self.k)));
        }
        for n in &self.noise {
            n.validate()?;
        }
        if let SplitPolicy::RandomHalf { partitions: 0 } = self.split {
            return Err(Error::Config("random_half needs at least one partition".into()));
        }
        Ok(())
    }

    /// Manifest paths are taken relative to the dataset root unless absolute.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.dataset.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(r#"{"dataset": "data"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new("data"));
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.max_window, 5);
        assert_eq!(cfg.split, SplitPolicy::RandomHalf { partitions: 100 });
        cfg.validate().unwrap();
    }

    #[test]
    fn full_document() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "dataset": "outex",
                "descriptor": "lbp_riu2",
                "max_window": 7,
                "noise": [{"kind": "salt_pepper", "rho": 0.3}, {"kind": "gaussian_blur", "sigma": 1.25}],
                "trials": 3,
                "split": {"policy": "manifest", "path": "split.csv"},
                "k": 3,
                "seed": 42
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.descriptor, Descriptor::LbpRiu2);
        assert_eq!(cfg.noise.len(), 2);
        assert_eq!(cfg.resolve(Path::new("split.csv")), PathBuf::from("outex/split.csv"));
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"dataset": "d", "folds": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"dataset": "d", "descriptor": "sift"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"dataset": "d", "split": {"policy": "random_half", "n": 2}}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::new("d");
        cfg.k = 2;
        assert!(cfg.validate().is_err());
        cfg.k = 1;
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.max_window = 4;
        assert!(cfg.validate().is_err());
        cfg.max_window = 5;
        cfg.noise = vec![Noise::SaltPepper { rho: 2.0 }];
        assert!(cfg.validate().is_err());
    }
}
