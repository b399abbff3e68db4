//! Robust adaptive median binary patterns.
//!
//! Each pixel's threshold `T` (see [`crate::threshold`]) is compared against
//! eight patch values placed on a square ring of radius `R = W_m + WS`, where
//! `WS` is the width of the pixel's own threshold window. A patch value is the
//! adaptive-window median around the patch center, computed with the same
//! growth rule as the threshold. Bit `i` is set when `T >= beta_i`.
//!
//! Patches are enumerated east first, then counter-clockwise:
//! `(0,+R) (-R,+R) (-R,0) (-R,-R) (0,-R) (+R,-R) (+R,0) (+R,+R)` as
//! (row, column) offsets. Bit 0 belongs to the east patch.

use rayon::prelude::*;

use crate::detect::{classify_image, CorruptionMask};
use crate::error::Result;
use crate::histogram::FeatureHistogram;
use crate::image::{GrayImage, PixelPos};
use crate::threshold::{adaptive_window_median, build_threshold_map, DescriptorParams, ThresholdMap};

pub const RAMBP_BINS: usize = 256;

/// Unit ring offsets in bit order.
pub const RING: [(isize, isize); 8] = [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)];

/// The eight patch centers at Chebyshev distance `radius`, in bit order.
pub fn patch_centers(row: isize, col: isize, radius: usize) -> [(isize, isize); 8] {
    let r = radius as isize;
    RING.map(|(dr, dc)| (row + dr * r, col + dc * r))
}

/// One code per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternImage {
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl PatternImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    pub fn code(&self, pos: PixelPos) -> u8 {
        self.codes[pos.row * self.width + pos.col]
    }

    pub fn histogram(&self) -> FeatureHistogram {
        FeatureHistogram::from_codes(self.codes.iter().map(|&c| c as usize), RAMBP_BINS)
    }
}

/// Patch distance for a pixel whose threshold window has width `window_size`.
pub fn patch_radius(params: DescriptorParams, window_size: usize) -> usize {
    params.max_window + window_size
}

fn encode(threshold: f64, betas: impl Iterator<Item = f64>) -> u8 {
    betas
        .enumerate()
        .fold(0u8, |code, (i, beta)| if threshold >= beta { code | (1 << i) } else { code })
}

/// Code of a single pixel, computing every patch median from scratch.
pub fn rambp_code(
    img: &GrayImage,
    mask: &CorruptionMask,
    tmap: &ThresholdMap,
    pos: PixelPos,
    params: DescriptorParams,
) -> u8 {
    let (row, col) = pos.signed();
    let radius = patch_radius(params, tmap.window_size(pos));
    let centers = patch_centers(row, col, radius);
    encode(
        tmap.threshold(pos),
        centers
            .iter()
            .map(|&(r, c)| adaptive_window_median(img, mask, r, c, params.max_window).value),
    )
}

/// Patch medians for every center a pattern can reference, i.e. the image
/// grown by `2 * W_m` on each side.
struct PatchMedians {
    margin: isize,
    stride: usize,
    values: Vec<f64>,
}

impl PatchMedians {
    fn new(img: &GrayImage, mask: &CorruptionMask, params: DescriptorParams) -> Self {
        let margin = 2 * params.max_window;
        let stride = img.width() + 2 * margin;
        let rows = img.height() + 2 * margin;
        let margin = margin as isize;
        let values = (0..rows * stride)
            .into_par_iter()
            .map(|i| {
                let r = (i / stride) as isize - margin;
                let c = (i % stride) as isize - margin;
                adaptive_window_median(img, mask, r, c, params.max_window).value
            })
            .collect();
        PatchMedians { margin, stride, values }
    }

    #[inline]
    fn get(&self, row: isize, col: isize) -> f64 {
        self.values[(row + self.margin) as usize * self.stride + (col + self.margin) as usize]
    }
}

/// Codes for every pixel given the detection and threshold stages.
pub fn rambp_codes(
    img: &GrayImage,
    mask: &CorruptionMask,
    tmap: &ThresholdMap,
    params: DescriptorParams,
) -> Result<PatternImage> {
    params.validate()?;
    mask.matches(img)?;
    let medians = PatchMedians::new(img, mask, params);
    let width = img.width();
    let codes = (0..img.len())
        .into_par_iter()
        .map(|i| {
            let pos = PixelPos::new(i / width, i % width);
            let (row, col) = pos.signed();
            let radius = patch_radius(params, tmap.window_size(pos));
            let centers = patch_centers(row, col, radius);
            encode(tmap.threshold(pos), centers.iter().map(|&(r, c)| medians.get(r, c)))
        })
        .collect();
    Ok(PatternImage {
        width,
        height: img.height(),
        codes,
    })
}

/// All intermediate products of the descriptor for one image.
#[derive(Clone, Debug)]
pub struct RambpAnalysis {
    pub mask: CorruptionMask,
    pub thresholds: ThresholdMap,
    pub patterns: PatternImage,
}

pub fn rambp_analyze(img: &GrayImage, params: DescriptorParams) -> Result<RambpAnalysis> {
    let mask = classify_image(img);
    let thresholds = build_threshold_map(img, &mask, params)?;
    let patterns = rambp_codes(img, &mask, &thresholds, params)?;
    Ok(RambpAnalysis {
        mask,
        thresholds,
        patterns,
    })
}

/// Detection, thresholds and codes, summarized as a normalized 256-bin histogram.
pub fn rambp_descriptor(img: &GrayImage, params: DescriptorParams) -> Result<FeatureHistogram> {
    Ok(rambp_analyze(img, params)?.patterns.histogram())
}
