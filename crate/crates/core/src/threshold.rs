//! Per-pixel thresholds from adaptive windows of uncorrupted neighbors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::CorruptionMask;
use crate::error::{Error, Result};
use crate::image::{GrayImage, PixelPos};

/// Parameters shared by the threshold and pattern stages.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorParams {
    /// Largest width the adaptive window may reach (odd, at least 3).
    pub max_window: usize,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams { max_window: 5 }
    }
}

impl DescriptorParams {
    pub fn new(max_window: usize) -> Result<Self> {
        let p = DescriptorParams { max_window };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_window < 3 || self.max_window.is_multiple_of(2) {
            return Err(Error::Param(format!(
                "max window {} must be odd and at least 3",
                self.max_window
            )));
        }
        Ok(())
    }
}

/// Median of uncorrupted intensities inside the accepted window.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct WindowMedian {
    /// Exact; even counts give the midpoint of the two central values.
    pub value: f64,
    /// Width of the accepted window.
    pub accepted: usize,
}

pub(crate) fn exact_median(values: &mut [u8]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        f64::from(values[n / 2])
    } else {
        (f64::from(values[n / 2 - 1]) + f64::from(values[n / 2])) / 2.0
    }
}

/// Grows a window from 3x3 by two pixels per step while it is narrower than
/// `max_window`, accepting the first one in which uncorrupted pixels make up
/// at least half (`N_un >= w^2 / 2`). If none is accepted the `max_window`
/// window is used without testing. The center may lie outside the image;
/// both intensities and labels are read with replicate-edge padding.
pub fn adaptive_window_median(
    img: &GrayImage,
    mask: &CorruptionMask,
    row: isize,
    col: isize,
    max_window: usize,
) -> WindowMedian {
    let mut accepted = max_window;
    let mut w = 3;
    while w < max_window {
        let half = (w / 2) as isize;
        let mut clean = 0;
        for dr in -half..=half {
            for dc in -half..=half {
                clean += usize::from(mask.is_clean_padded(row + dr, col + dc));
            }
        }
        if 2 * clean >= w * w {
            accepted = w;
            break;
        }
        w += 2;
    }

    let half = (accepted / 2) as isize;
    let mut values = Vec::with_capacity(accepted * accepted);
    for dr in -half..=half {
        for dc in -half..=half {
            if mask.is_clean_padded(row + dr, col + dc) {
                values.push(img.sample_padded(row + dr, col + dc));
            }
        }
    }
    if values.is_empty() {
        img.gather_window(row, col, accepted, &mut values);
    }
    WindowMedian {
        value: exact_median(&mut values),
        accepted,
    }
}

/// Thresholds and accepted window widths for every pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdMap {
    width: usize,
    height: usize,
    thresholds: Vec<f64>,
    window_sizes: Vec<usize>,
}

impl ThresholdMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn threshold(&self, pos: PixelPos) -> f64 {
        self.thresholds[pos.row * self.width + pos.col]
    }

    /// 1 for uncorrupted pixels.
    #[inline]
    pub fn window_size(&self, pos: PixelPos) -> usize {
        self.window_sizes[pos.row * self.width + pos.col]
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn window_sizes(&self) -> &[usize] {
        &self.window_sizes
    }

    /// Thresholds rounded half-up to gray levels, for inspection.
    pub fn thresholds_image(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.thresholds.iter().map(|t| t.round() as u8).collect(),
        )
        .expect("valid dimensions")
    }

    /// Window widths as gray levels, for inspection.
    pub fn window_sizes_image(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.window_sizes.iter().map(|&w| w.min(255) as u8).collect(),
        )
        .expect("valid dimensions")
    }
}

/// Uncorrupted pixels keep their own intensity (window 1); corrupted ones take
/// [`adaptive_window_median`] around themselves.
pub fn build_threshold_map(img: &GrayImage, mask: &CorruptionMask, params: DescriptorParams) -> Result<ThresholdMap> {
    params.validate()?;
    mask.matches(img)?;
    let (width, height) = (img.width(), img.height());
    let (thresholds, window_sizes): (Vec<f64>, Vec<usize>) = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let (row, col) = (i / width, i % width);
            if mask.is_clean(row, col) {
                (f64::from(img.get(row, col)), 1)
            } else {
                let m = adaptive_window_median(img, mask, row as isize, col as isize, params.max_window);
                (m.value, m.accepted)
            }
        })
        .unzip();
    Ok(ThresholdMap {
        width,
        height,
        thresholds,
        window_sizes,
    })
}
