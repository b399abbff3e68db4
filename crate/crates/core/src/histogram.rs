use crate::error::{Error, Result};

/// An L1-normalized pattern histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureHistogram {
    bins: Vec<f64>,
}

impl FeatureHistogram {
    /// Wraps already-normalized bins, e.g. ones read back from a feature file.
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::Empty("histogram bins"));
        }
        if let Some(b) = bins.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(Error::Param(format!("histogram bin {b} is not a finite nonnegative value")));
        }
        Ok(FeatureHistogram { bins })
    }

    /// Counts `codes` into `num_bins` bins and divides by the number of codes.
    ///
    /// Panics if a code is out of range.
    pub fn from_codes(codes: impl IntoIterator<Item = usize>, num_bins: usize) -> Self {
        let mut counts = vec![0u64; num_bins];
        for c in codes {
            counts[c] += 1;
        }
        Self::from_counts(&counts)
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        let bins = if total == 0 {
            vec![0.0; counts.len()]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        FeatureHistogram { bins }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}
