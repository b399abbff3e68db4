//! Reference descriptors: LBP(8,1), its rotation-invariant uniform mapping, and MBP.
//!
//! All three sample the 3x3 neighborhood with replicate-edge padding and use
//! the same neighbor order as [`crate::pattern::RING`].

use serde::{Deserialize, Serialize};

use crate::histogram::FeatureHistogram;
use crate::image::GrayImage;
use crate::pattern::RING;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Lbp,
    LbpRiu2,
    Mbp,
}

impl BaselineKind {
    pub fn num_bins(self) -> usize {
        match self {
            BaselineKind::Lbp => 256,
            BaselineKind::LbpRiu2 => 10,
            BaselineKind::Mbp => 512,
        }
    }

    pub fn describe(self, img: &GrayImage) -> FeatureHistogram {
        match self {
            BaselineKind::Lbp => lbp_descriptor(img),
            BaselineKind::LbpRiu2 => lbp_riu2_descriptor(img),
            BaselineKind::Mbp => mbp_descriptor(img),
        }
    }
}

fn neighbors(img: &GrayImage, row: usize, col: usize) -> [u8; 8] {
    let (r, c) = (row as isize, col as isize);
    RING.map(|(dr, dc)| img.sample_padded(r + dr, c + dc))
}

/// Bit `i` is set when neighbor `i` is at least the center.
pub fn lbp_code(img: &GrayImage, row: usize, col: usize) -> u8 {
    let center = img.get(row, col);
    neighbors(img, row, col)
        .iter()
        .enumerate()
        .fold(0, |code, (i, &n)| if n >= center { code | (1 << i) } else { code })
}

pub fn lbp_codes(img: &GrayImage) -> Vec<u8> {
    img.positions().map(|p| lbp_code(img, p.row, p.col)).collect()
}

pub fn lbp_descriptor(img: &GrayImage) -> FeatureHistogram {
    FeatureHistogram::from_codes(lbp_codes(img).into_iter().map(usize::from), 256)
}

/// Uniform codes (at most two circular 0/1 transitions) map to their number
/// of set bits; every other code maps to 9.
pub const fn riu2_map(code: u8) -> usize {
    let transitions = (code ^ code.rotate_right(1)).count_ones();
    if transitions <= 2 {
        code.count_ones() as usize
    } else {
        9
    }
}

pub fn lbp_riu2_descriptor(img: &GrayImage) -> FeatureHistogram {
    FeatureHistogram::from_codes(lbp_codes(img).into_iter().map(riu2_map), 10)
}

/// 9-bit code: the eight neighbors in ring order, then the center as bit 8,
/// each set when the pixel is at least the median of the 3x3 block.
pub fn mbp_code(img: &GrayImage, row: usize, col: usize) -> u16 {
    let ring = neighbors(img, row, col);
    let center = img.get(row, col);
    let mut block = [0u8; 9];
    block[..8].copy_from_slice(&ring);
    block[8] = center;
    let mut sorted = block;
    sorted.sort_unstable();
    let median = sorted[4];
    block
        .iter()
        .enumerate()
        .fold(0, |code, (i, &v)| if v >= median { code | (1 << i) } else { code })
}

pub fn mbp_descriptor(img: &GrayImage) -> FeatureHistogram {
    FeatureHistogram::from_codes(img.positions().map(|p| usize::from(mbp_code(img, p.row, p.col))), 512)
}
