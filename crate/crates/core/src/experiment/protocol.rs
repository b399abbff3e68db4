//! Classification and retrieval protocols over a labeled dataset.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::results::{ResultRow, ResultTable, RetrievalCurve};
use super::seed::noise_seed;
use super::split::{first_partition, partitions, Partition};
use crate::dataset::{load_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::histogram::FeatureHistogram;
use crate::image::GrayImage;
use crate::metrics::{knn_from_distances, pr_curve_from_rankings, chi_square, RankedRetrieval};
use crate::noise::Noise;

/// Features of the given images, in input order.
pub fn extract_features(cfg: &ExperimentConfig, images: &[&GrayImage]) -> Result<Vec<FeatureHistogram>> {
    let params = cfg.params();
    images
        .par_iter()
        .map(|img| cfg.descriptor.extract(img, params))
        .collect()
}

fn dataset_features(cfg: &ExperimentConfig, dataset: &LabeledDataset, indices: &[usize]) -> Result<Vec<FeatureHistogram>> {
    let images: Vec<&GrayImage> = indices.iter().map(|&i| &dataset.samples()[i].image).collect();
    extract_features(cfg, &images)
}

/// Fraction of `test` features whose k-NN vote over `train` returns the true class.
fn knn_accuracy(
    train: &[FeatureHistogram],
    train_classes: &[usize],
    test: &[FeatureHistogram],
    test_classes: &[usize],
    k: usize,
) -> Result<f64> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Empty("train or test set"));
    }
    let predicted = test
        .par_iter()
        .map(|q| {
            let d = train.iter().map(|t| chi_square(q, t)).collect::<Result<Vec<_>>>()?;
            knn_from_distances(&d, train_classes.iter().copied(), k)
        })
        .collect::<Result<Vec<_>>>()?;
    let correct = predicted.iter().zip(test_classes).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / test.len() as f64)
}

/// The noise entries of a run; an empty list stands for a single noise-free entry.
fn noise_entries(cfg: &ExperimentConfig) -> Vec<Option<Noise>> {
    if cfg.noise.is_empty() {
        vec![None]
    } else {
        cfg.noise.iter().copied().map(Some).collect()
    }
}

fn noise_label(noise: Option<Noise>) -> (String, f64) {
    match noise {
        Some(n) => (n.kind_name().to_string(), n.parameter()),
        None => ("none".to_string(), 0.0),
    }
}

/// Degrades the images at `indices` for one trial; the dataset index picks the stream.
fn degrade(cfg: &ExperimentConfig, dataset: &LabeledDataset, indices: &[usize], noise: Noise, trial: usize) -> Result<Vec<GrayImage>> {
    indices
        .par_iter()
        .map(|&i| {
            let seed = noise_seed(cfg.seed, noise.kind_name(), noise.parameter(), trial, i);
            noise.apply(&dataset.samples()[i].image, seed)
        })
        .collect()
}

/// Features of the query images for one trial. Deterministic degradations
/// ignore `trial`, so callers may reuse trial 0.
fn query_features(cfg: &ExperimentConfig, dataset: &LabeledDataset, indices: &[usize], noise: Option<Noise>, trial: usize) -> Result<Vec<FeatureHistogram>> {
    match noise {
        None => dataset_features(cfg, dataset, indices),
        Some(n) => {
            let noisy = degrade(cfg, dataset, indices, n, trial)?;
            extract_features(cfg, &noisy.iter().collect::<Vec<_>>())
        }
    }
}

fn is_seed_free(noise: Option<Noise>) -> bool {
    noise.is_none_or(|n| !n.is_random())
}

fn classes_of(dataset: &LabeledDataset, indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|&i| dataset.samples()[i].class).collect()
}

/// Clean training features, noisy test features, one row per (noise, trial).
pub fn noisy_classification(cfg: &ExperimentConfig, dataset: &LabeledDataset, split: &Partition) -> Result<ResultTable> {
    cfg.validate()?;
    let train = dataset_features(cfg, dataset, &split.train)?;
    let train_classes = classes_of(dataset, &split.train);
    let test_classes = classes_of(dataset, &split.test);
    let mut table = ResultTable::default();
    for noise in noise_entries(cfg) {
        let (label, param) = noise_label(noise);
        let mut reused: Option<f64> = None;
        for trial in 0..cfg.trials {
            let accuracy = match reused {
                Some(a) => a,
                None => {
                    let test = query_features(cfg, dataset, &split.test, noise, trial)?;
                    let a = knn_accuracy(&train, &train_classes, &test, &test_classes, cfg.k)?;
                    if is_seed_free(noise) {
                        reused = Some(a);
                    }
                    a
                }
            };
            table.push(ResultRow {
                descriptor: cfg.descriptor,
                max_window: cfg.max_window,
                noise: label.clone(),
                param,
                trial,
                accuracy,
            });
        }
    }
    Ok(table)
}

/// Loads the dataset and runs the noisy protocol on the first partition of the split.
pub fn run_noisy_classification(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let dataset = load_dataset(&cfg.dataset)?;
    let split = first_partition(cfg, &dataset)?;
    noisy_classification(cfg, &dataset, &split)
}

/// Clean features throughout, one row per partition or fold.
pub fn noise_free_classification(cfg: &ExperimentConfig, dataset: &LabeledDataset) -> Result<ResultTable> {
    cfg.validate()?;
    let splits = partitions(cfg, dataset)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let features = dataset_features(cfg, dataset, &all)?;
    let classes = classes_of(dataset, &all);
    let pick = |idx: &[usize]| -> (Vec<FeatureHistogram>, Vec<usize>) {
        (idx.iter().map(|&i| features[i].clone()).collect(), idx.iter().map(|&i| classes[i]).collect())
    };
    let mut table = ResultTable::default();
    for (p, split) in splits.iter().enumerate() {
        let (train, train_classes) = pick(&split.train);
        let (test, test_classes) = pick(&split.test);
        table.push(ResultRow {
            descriptor: cfg.descriptor,
            max_window: cfg.max_window,
            noise: "none".into(),
            param: 0.0,
            trial: p,
            accuracy: knn_accuracy(&train, &train_classes, &test, &test_classes, cfg.k)?,
        });
    }
    Ok(table)
}

pub fn run_noise_free_classification(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    noise_free_classification(cfg, &load_dataset(&cfg.dataset)?)
}

/// Every image as a noisy query against every clean image; the curve averages
/// over queries and trials.
pub fn retrieval(cfg: &ExperimentConfig, dataset: &LabeledDataset, ks: &[usize]) -> Result<Vec<RetrievalCurve>> {
    cfg.validate()?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let db = dataset_features(cfg, dataset, &all)?;
    let db_classes = classes_of(dataset, &all);
    let mut curves = Vec::new();
    for noise in noise_entries(cfg) {
        let (label, param) = noise_label(noise);
        let trials = if is_seed_free(noise) { 1 } else { cfg.trials };
        let mut rankings = Vec::with_capacity(trials * all.len());
        for trial in 0..trials {
            let queries = query_features(cfg, dataset, &all, noise, trial)?;
            let ranked = queries
                .par_iter()
                .zip(db_classes.par_iter())
                .map(|(q, &class)| {
                    let d = db.iter().map(|t| chi_square(q, t)).collect::<Result<Vec<_>>>()?;
                    RankedRetrieval::from_distances(class, &d, &db_classes)
                })
                .collect::<Result<Vec<_>>>()?;
            rankings.extend(ranked);
        }
        curves.push(RetrievalCurve {
            descriptor: cfg.descriptor,
            max_window: cfg.max_window,
            noise: label,
            param,
            curve: pr_curve_from_rankings(&rankings, &db_classes, ks)?,
        });
    }
    Ok(curves)
}

pub fn run_retrieval(cfg: &ExperimentConfig, ks: &[usize]) -> Result<Vec<RetrievalCurve>> {
    cfg.validate()?;
    retrieval(cfg, &load_dataset(&cfg.dataset)?, ks)
}

/// The noisy protocol repeated for each maximum window size.
pub fn window_sweep(cfg: &ExperimentConfig, dataset: &LabeledDataset, split: &Partition, sizes: &[usize]) -> Result<ResultTable> {
    if sizes.is_empty() {
        return Err(Error::Empty("window size list"));
    }
    let mut table = ResultTable::default();
    for &size in sizes {
        let run = ExperimentConfig {
            max_window: size,
            ..cfg.clone()
        };
        table.extend(noisy_classification(&run, dataset, split)?);
    }
    Ok(table)
}

pub fn sweep_window_size(cfg: &ExperimentConfig, sizes: &[usize]) -> Result<ResultTable> {
    cfg.validate()?;
    let dataset = load_dataset(&cfg.dataset)?;
    let split = first_partition(cfg, &dataset)?;
    window_sweep(cfg, &dataset, &split, sizes)
}
