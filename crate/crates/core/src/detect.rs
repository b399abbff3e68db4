//! Boundary-discriminative impulse detection.
//!
//! Every pixel is tested against the intensity clusters of a large window
//! (21x21) around it. The window is sorted, the median located, and the
//! largest gap between consecutive sorted values is found on each side of the
//! median. Those two gaps split the window into a low, a middle and a high
//! cluster; a pixel inside the middle cluster is uncorrupted. Pixels that fail
//! are re-tested on a 3x3 window and labeled corrupted only if they fail again.
//!
//! Cluster convention, with 1-based sorted values `s` and `m = (N+1)/2`:
//! the left gap is searched over `D[i] = s[i+1] - s[i]` for `i < m`, the right
//! gap over `i >= m`, ties go to the smallest index, and the middle cluster is
//! `(v_low, v_high]`. When every left difference is zero there is no low
//! cluster and the middle cluster is closed on the left.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{clamp_index, GrayImage, PixelPos};

pub const STAGE1_WINDOW: usize = 21;
pub const STAGE2_WINDOW: usize = 3;

/// Per-pixel corruption labels; `true` means uncorrupted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionMask {
    width: usize,
    height: usize,
    clean: Vec<bool>,
}

impl CorruptionMask {
    pub fn all_clean(width: usize, height: usize) -> Self {
        CorruptionMask {
            width,
            height,
            clean: vec![true; width * height],
        }
    }

    pub fn from_flags(width: usize, height: usize, clean: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions { width, height });
        }
        if clean.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                len: clean.len(),
            });
        }
        Ok(CorruptionMask { width, height, clean })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.clean
    }

    #[inline]
    pub fn is_clean(&self, row: usize, col: usize) -> bool {
        self.clean[row * self.width + col]
    }

    #[inline]
    pub fn is_clean_padded(&self, row: isize, col: isize) -> bool {
        self.is_clean(clamp_index(row, self.height), clamp_index(col, self.width))
    }

    pub fn set(&mut self, row: usize, col: usize, clean: bool) {
        self.clean[row * self.width + col] = clean;
    }

    pub fn corrupted_count(&self) -> usize {
        self.clean.iter().filter(|&&c| !c).count()
    }

    /// 255 for uncorrupted, 0 for corrupted.
    pub fn to_image(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.clean.iter().map(|&c| if c { 255 } else { 0 }).collect(),
        )
        .expect("mask dimensions are valid")
    }

    pub(crate) fn matches(&self, img: &GrayImage) -> Result<()> {
        if self.width != img.width() || self.height != img.height() {
            return Err(Error::Mismatch(format!(
                "mask is {}x{} but image is {}x{}",
                self.width,
                self.height,
                img.width(),
                img.height()
            )));
        }
        Ok(())
    }
}

/// Sorted window statistics and the two cluster boundaries derived from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryAnalysis {
    pub sorted: Vec<u8>,
    pub median: u8,
    pub v_low: u8,
    pub v_high: u8,
    /// No positive difference left of the median, so nothing lies in a low cluster.
    pub low_cluster_empty: bool,
}

impl BoundaryAnalysis {
    pub fn in_middle_cluster(&self, value: u8) -> bool {
        in_middle(value, self.v_low, self.v_high, self.low_cluster_empty)
    }
}

#[inline]
fn in_middle(value: u8, v_low: u8, v_high: u8, low_empty: bool) -> bool {
    (value > v_low || (low_empty && value == v_low)) && value <= v_high
}

/// Splits an odd-sized sample into low, middle and high clusters.
pub fn boundary_analysis(values: &[u8]) -> Result<BoundaryAnalysis> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Param(format!("window sample size {n} must be odd and at least 3")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    // 1-based indices as in the cluster convention; s(i) = sorted[i - 1]
    let s = |i: usize| sorted[i - 1];
    let d = |i: usize| s(i + 1) - s(i);
    let mid = n.div_ceil(2);

    let argmax = |range: std::ops::RangeInclusive<usize>| {
        let mut best = (0u8, *range.start());
        for i in range {
            if d(i) > best.0 {
                best = (d(i), i);
            }
        }
        best
    };
    let (left_gap, left_idx) = argmax(1..=mid - 1);
    let (right_gap, right_idx) = argmax(mid..=n - 1);
    let v_low = if left_gap == 0 { s(mid - 1) } else { s(left_idx) };
    let v_high = if right_gap == 0 { s(mid) } else { s(right_idx) };
    Ok(BoundaryAnalysis {
        median: s(mid),
        v_low,
        v_high,
        low_cluster_empty: left_gap == 0,
        sorted,
    })
}

/// Two-stage verdict for one pixel; `true` means uncorrupted.
pub fn classify_pixel(img: &GrayImage, pos: PixelPos, stage1: usize, stage2: usize) -> Result<bool> {
    for w in [stage1, stage2] {
        if w < 3 || w % 2 == 0 {
            return Err(Error::Param(format!("window width {w} must be odd and at least 3")));
        }
    }
    let value = img.at(pos);
    let (row, col) = pos.signed();
    let mut buf = Vec::with_capacity(stage1 * stage1);
    img.gather_window(row, col, stage1, &mut buf);
    if boundary_analysis(&buf)?.in_middle_cluster(value) {
        return Ok(true);
    }
    buf.clear();
    img.gather_window(row, col, stage2, &mut buf);
    Ok(boundary_analysis(&buf)?.in_middle_cluster(value))
}

/// Intensity histogram of a sliding window.
struct WindowHistogram {
    counts: [u32; 256],
    total: u32,
}

impl WindowHistogram {
    fn new() -> Self {
        WindowHistogram {
            counts: [0; 256],
            total: 0,
        }
    }

    #[inline]
    fn add(&mut self, v: u8) {
        self.counts[v as usize] += 1;
        self.total += 1;
    }

    #[inline]
    fn remove(&mut self, v: u8) {
        self.counts[v as usize] -= 1;
        self.total -= 1;
    }

    /// Same boundaries as [`boundary_analysis`], read off the histogram.
    ///
    /// A difference left of the median is a gap between consecutive distinct
    /// values `a < b` with `b <= median`; one right of it has `a >= median`.
    fn clusters(&self) -> (u8, u8, bool) {
        let rank = self.total.div_ceil(2);
        let mut acc = 0;
        let mut median = 0usize;
        for (v, &c) in self.counts.iter().enumerate() {
            acc += c;
            if acc >= rank {
                median = v;
                break;
            }
        }

        let mut prev: Option<usize> = None;
        let (mut left_gap, mut v_low) = (0, median);
        for v in 0..=median {
            if self.counts[v] > 0 {
                if let Some(p) = prev {
                    if v - p > left_gap {
                        left_gap = v - p;
                        v_low = p;
                    }
                }
                prev = Some(v);
            }
        }

        let (mut right_gap, mut v_high) = (0, median);
        let mut prev = median;
        for v in median + 1..256 {
            if self.counts[v] > 0 {
                if v - prev > right_gap {
                    right_gap = v - prev;
                    v_high = prev;
                }
                prev = v;
            }
        }
        (v_low as u8, v_high as u8, left_gap == 0)
    }
}

fn stage2_verdict(img: &GrayImage, row: usize, col: usize, size: usize) -> bool {
    let mut buf = Vec::with_capacity(size * size);
    img.gather_window(row as isize, col as isize, size, &mut buf);
    boundary_analysis(&buf)
        .expect("validated window size")
        .in_middle_cluster(img.get(row, col))
}

/// Labels every pixel with the default 21x21 / 3x3 windows.
pub fn classify_image(img: &GrayImage) -> CorruptionMask {
    classify_image_with(img, STAGE1_WINDOW, STAGE2_WINDOW).expect("default windows are valid")
}

/// Labels every pixel; rows are processed in parallel with a sliding
/// stage-one histogram, so each step costs one column in and one out.
pub fn classify_image_with(img: &GrayImage, stage1: usize, stage2: usize) -> Result<CorruptionMask> {
    for w in [stage1, stage2] {
        if w < 3 || w % 2 == 0 {
            return Err(Error::Param(format!("window width {w} must be odd and at least 3")));
        }
    }
    let (w, h) = (img.width(), img.height());
    let half = (stage1 / 2) as isize;
    let mut clean = vec![false; w * h];
    clean.par_chunks_mut(w).enumerate().for_each(|(row, out)| {
        let r = row as isize;
        let rows: Vec<usize> = (-half..=half).map(|dr| clamp_index(r + dr, h)).collect();
        let column = |c: isize| {
            let c = clamp_index(c, w);
            rows.iter().map(move |&rr| img.get(rr, c))
        };
        let mut hist = WindowHistogram::new();
        for dc in -half..=half {
            column(dc).for_each(|v| hist.add(v));
        }
        for (col, flag) in out.iter_mut().enumerate() {
            if col > 0 {
                let c = col as isize;
                column(c - 1 - half).for_each(|v| hist.remove(v));
                column(c + half).for_each(|v| hist.add(v));
            }
            let (v_low, v_high, low_empty) = hist.clusters();
            *flag = in_middle(img.get(row, col), v_low, v_high, low_empty) || stage2_verdict(img, row, col, stage2);
        }
    });
    Ok(CorruptionMask {
        width: w,
        height: h,
        clean,
    })
}
