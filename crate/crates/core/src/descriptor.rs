use serde::{Deserialize, Serialize};

use crate::baselines::BaselineKind;
use crate::error::Result;
use crate::histogram::FeatureHistogram;
use crate::image::GrayImage;
use crate::pattern::{rambp_descriptor, RAMBP_BINS};
use crate::threshold::DescriptorParams;

/// Every descriptor the experiment harness can extract.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    #[default]
    Rambp,
    Lbp,
    LbpRiu2,
    Mbp,
}

impl Descriptor {
    pub const ALL: [Descriptor; 4] = [Descriptor::Rambp, Descriptor::Lbp, Descriptor::LbpRiu2, Descriptor::Mbp];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Rambp => "rambp",
            Descriptor::Lbp => "lbp",
            Descriptor::LbpRiu2 => "lbp_riu2",
            Descriptor::Mbp => "mbp",
        }
    }

    pub fn num_bins(self) -> usize {
        match self.baseline() {
            None => RAMBP_BINS,
            Some(b) => b.num_bins(),
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            Descriptor::Rambp => None,
            Descriptor::Lbp => Some(BaselineKind::Lbp),
            Descriptor::LbpRiu2 => Some(BaselineKind::LbpRiu2),
            Descriptor::Mbp => Some(BaselineKind::Mbp),
        }
    }

    /// `params` only affects RAMBP.
    pub fn extract(self, img: &GrayImage, params: DescriptorParams) -> Result<FeatureHistogram> {
        match self.baseline() {
            None => rambp_descriptor(img, params),
            Some(b) => Ok(b.describe(img)),
        }
    }
}

impl std::fmt::Display for Descriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Descriptor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Descriptor::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown descriptor `{s}` (expected rambp, lbp, lbp_riu2 or mbp)"))
    }
}
