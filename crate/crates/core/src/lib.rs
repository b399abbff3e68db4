//! Noise-robust texture description with robust adaptive median binary
//! patterns (RAMBP), reference LBP/MBP descriptors, chi-square k-NN
//! classification and retrieval scoring, and the experiment protocols that
//! tie them together.
//!
//! The descriptor runs in three stages: [`detect`] marks impulse-corrupted
//! pixels, [`threshold`] computes an adaptive-window median over the clean
//! ones, and [`pattern`] compares each threshold with eight patch medians on
//! a ring whose radius follows the accepted window.

pub mod baselines;
pub mod dataset;
pub mod descriptor;
pub mod detect;
pub mod error;
pub mod experiment;
pub mod histogram;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod pattern;
pub mod threshold;

pub use dataset::{load_dataset, LabeledDataset, Sample};
pub use descriptor::Descriptor;
pub use detect::{boundary_analysis, classify_image, classify_pixel, BoundaryAnalysis, CorruptionMask};
pub use error::{Error, PgmError, Result};
pub use histogram::FeatureHistogram;
pub use image::{read_pgm, write_pgm, GrayImage, PixelPos};
pub use metrics::{chi_square, knn_classify, rank_references, recall_precision, LabeledHistogram, PrCurve, RankedRetrieval};
pub use noise::{Noise, NoiseSpec};
pub use pattern::{rambp_analyze, rambp_descriptor, RambpAnalysis};
pub use threshold::{build_threshold_map, DescriptorParams, ThresholdMap};
