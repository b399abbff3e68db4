//! Experiment protocols, result tables, and the synthetic texture set.

mod config;
mod protocol;
mod results;
mod seed;
mod split;
mod synth;

use std::fmt::Write as _;

use serde::Serialize;

pub use config::{ExperimentConfig, SplitPolicy};
pub use protocol::{
    extract_features, noise_free_classification, noisy_classification, retrieval, run_noise_free_classification,
    run_noisy_classification, run_retrieval, sweep_window_size, window_sweep,
};
pub use results::{retrieval_csv, GroupMean, ResultRow, ResultTable, RetrievalCurve};
pub use seed::{derive_seed, noise_seed};
pub use split::{first_partition, group_partitions, manifest_partition, partitions, random_half, Partition};
pub use synth::{split_manifest, synth_dataset, synth_image, write_synth_dataset, SynthConfig, SYNTH_CLASSES};

use crate::dataset::LabeledDataset;
use crate::descriptor::Descriptor;
use crate::error::{Error, Result};
use crate::threshold::DescriptorParams;

/// `path,class,b0,...` rows, bins printed with 17 significant digits.
pub fn features_csv(dataset: &LabeledDataset, descriptor: Descriptor, params: DescriptorParams) -> Result<String> {
    let cfg = ExperimentConfig {
        descriptor,
        max_window: params.max_window,
        ..ExperimentConfig::new("")
    };
    let images: Vec<_> = dataset.samples().iter().map(|s| &s.image).collect();
    let features = extract_features(&cfg, &images)?;
    let mut out = String::from("path,class");
    for b in 0..descriptor.num_bins() {
        let _ = write!(out, ",b{b}");
    }
    out.push('\n');
    for (sample, hist) in dataset.samples().iter().zip(&features) {
        out.push_str(&sample.path);
        out.push(',');
        out.push_str(&dataset.classes()[sample.class]);
        for v in hist.bins() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Machine-readable record of what produced a set of outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest<'a> {
    pub software: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<String>,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig) -> Self {
        RunManifest {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_rows_round_trip() {
        let (ds, _) = synth_dataset(&SynthConfig {
            per_class: 2,
            train_per_class: 1,
            size: 16,
            seed: 2,
        })
        .unwrap();
        let csv = features_csv(&ds, Descriptor::Rambp, DescriptorParams::default()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(lines[0].starts_with("path,class,b0,b1,"));
        assert!(lines[0].ends_with(",b255"));
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 2 + 256);
        assert_eq!(fields[0], "grating_000/000.pgm");
        assert_eq!(fields[1], "grating_000");
        let expected = Descriptor::Rambp.extract(&ds.samples()[0].image, DescriptorParams::default()).unwrap();
        for (f, v) in fields[2..].iter().zip(expected.bins()) {
            assert_eq!(f.parse::<f64>().unwrap(), *v);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let (ds, _) = synth_dataset(&SynthConfig {
            per_class: 2,
            train_per_class: 1,
            size: 16,
            seed: 2,
        })
        .unwrap();
        let one = with_workers(1, || features_csv(&ds, Descriptor::Rambp, DescriptorParams::default())).unwrap().unwrap();
        let many = with_workers(8, || features_csv(&ds, Descriptor::Rambp, DescriptorParams::default())).unwrap().unwrap();
        assert_eq!(one, many);
        assert!(with_workers(0, || ()).is_err());
    }

    #[test]
    fn manifest_echoes_config() {
        let cfg = ExperimentConfig::new("data");
        let json = RunManifest::new("classify", &cfg).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["config"]["dataset"], "data");
        assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    }
}
