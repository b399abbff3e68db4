//! A small seeded texture set: four oriented low-contrast gratings and one
//! class of random sinusoid mixtures, all overlaid with per-pixel grain.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::seed::derive_seed;
use super::split::Partition;
use crate::dataset::{LabeledDataset, Sample};
use crate::error::{Error, Result};
use crate::image::GrayImage;

const SYNTH_STREAM: u64 = 0x0053_594e_5448;

/// Class names, in class-index order.
pub const SYNTH_CLASSES: [&str; 5] = ["grating_000", "grating_045", "grating_090", "grating_135", "mixture"];

/// Orientation in degrees and period in pixels of each grating class.
const GRATINGS: [(f64, f64); 4] = [(0.0, 20.0), (45.0, 28.0), (90.0, 20.0), (135.0, 28.0)];

/// Nominal grating amplitude; each image scales it by a factor in [0.85, 1.15).
const AMPLITUDE: f64 = 10.0;

/// Half-width of the uniform per-pixel grain.
const GRAIN: f64 = 6.0;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub per_class: usize,
    /// Images per class assigned to training; the rest test.
    pub train_per_class: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            per_class: 50,
            train_per_class: 25,
            size: 64,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::Param("image size must be positive".into()));
        }
        if self.train_per_class == 0 || self.train_per_class >= self.per_class {
            return Err(Error::Param(format!(
                "train_per_class = {} must lie in 1..{}",
                self.train_per_class, self.per_class
            )));
        }
        Ok(())
    }
}

fn grating(rng: &mut ChaCha8Rng, size: usize, degrees: f64, period: f64) -> GrayImage {
    let theta = (degrees + rng.random_range(-5.0..5.0)) * PI / 180.0;
    let freq = 2.0 * PI / (period * rng.random_range(0.9..1.1));
    let phase = rng.random_range(0.0..2.0 * PI);
    let amplitude = AMPLITUDE * rng.random_range(0.85..1.15);
    let mean = rng.random_range(115.0..140.0);
    let (s, c) = theta.sin_cos();
    render(rng, size, |r, col| mean + amplitude * (freq * (col * c + r * s) + phase).sin())
}

fn mixture(rng: &mut ChaCha8Rng, size: usize) -> GrayImage {
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let theta = rng.random_range(0.0..PI);
            let freq = 2.0 * PI / rng.random_range(10.0..28.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            let amplitude = AMPLITUDE / 2.0 * rng.random_range(0.85..1.15);
            (theta, freq, phase, amplitude)
        })
        .collect();
    let mean = rng.random_range(115.0..140.0);
    render(rng, size, |r, col| {
        mean + waves
            .iter()
            .map(|&(theta, freq, phase, a)| a * (freq * (col * theta.cos() + r * theta.sin()) + phase).sin())
            .sum::<f64>()
    })
}

/// Low-contrast structure plus uniform per-pixel grain, kept inside [40, 215].
fn render(rng: &mut ChaCha8Rng, size: usize, f: impl Fn(f64, f64) -> f64) -> GrayImage {
    GrayImage::from_fn(size, size, |r, c| {
        let v = f(r as f64, c as f64) + rng.random_range(-GRAIN..GRAIN);
        v.round().clamp(40.0, 215.0) as u8
    })
    .expect("positive size")
}

/// One image of class `class`, reproducible from `(seed, class, index)`.
pub fn synth_image(cfg: &SynthConfig, class: usize, index: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[SYNTH_STREAM, class as u64, index as u64]));
    match GRATINGS.get(class) {
        Some(&(degrees, period)) => grating(&mut rng, cfg.size, degrees, period),
        None => mixture(&mut rng, cfg.size),
    }
}

/// The dataset and its fixed split (first `train_per_class` images of each class train).
pub fn synth_dataset(cfg: &SynthConfig) -> Result<(LabeledDataset, Partition)> {
    cfg.validate()?;
    let mut samples = Vec::new();
    let mut split = Partition { train: vec![], test: vec![] };
    for (class, name) in SYNTH_CLASSES.iter().enumerate() {
        for i in 0..cfg.per_class {
            if i < cfg.train_per_class {
                split.train.push(samples.len());
            } else {
                split.test.push(samples.len());
            }
            samples.push(Sample {
                image: synth_image(cfg, class, i),
                class,
                path: format!("{name}/{i:03}.pgm"),
            });
        }
    }
    let classes = SYNTH_CLASSES.iter().map(|s| s.to_string()).collect();
    Ok((LabeledDataset::new(classes, samples)?, split))
}

/// `path,role` rows for a partition.
pub fn split_manifest(dataset: &LabeledDataset, split: &Partition) -> String {
    let mut out = String::from("path,role\n");
    for (role, members) in [("train", &split.train), ("test", &split.test)] {
        for &i in members.iter() {
            let _ = writeln!(out, "{},{role}", dataset.samples()[i].path);
        }
    }
    out
}

/// Writes the images under `root` plus `root/split.csv`.
pub fn write_synth_dataset(cfg: &SynthConfig, root: &Path) -> Result<(LabeledDataset, Partition)> {
    let (dataset, split) = synth_dataset(cfg)?;
    dataset.write_to(root)?;
    let path = root.join("split.csv");
    std::fs::write(&path, split_manifest(&dataset, &split)).map_err(|source| Error::Io { path, source })?;
    Ok((dataset, split))
}
