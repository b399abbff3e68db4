//! Seeded image degradations: salt-and-pepper, additive Gaussian noise, Gaussian blur.
//!
//! Random streams come from `ChaCha8Rng::seed_from_u64(seed)`. ChaCha output is
//! specified independently of platform and word size, so a given seed yields
//! the same noisy image everywhere. Per pixel, in row-major order, salt-and-pepper
//! draws one uniform `f64` and, for corrupted pixels only, one `bool` for the
//! 0/255 choice; Gaussian noise draws one standard normal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{clamp_index, GrayImage};

/// A degradation model without its seed.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Noise {
    SaltPepper { rho: f64 },
    GaussianNoise { sigma: f64 },
    GaussianBlur { sigma: f64 },
}

/// A degradation together with the seed that makes it reproducible.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub noise: Noise,
    #[serde(default)]
    pub seed: u64,
}

impl Noise {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Noise::SaltPepper { rho } => check_density(rho),
            Noise::GaussianNoise { sigma } | Noise::GaussianBlur { sigma } => check_sigma(sigma),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Noise::SaltPepper { .. } => "salt_pepper",
            Noise::GaussianNoise { .. } => "gaussian_noise",
            Noise::GaussianBlur { .. } => "gaussian_blur",
        }
    }

    /// The density or standard deviation, whichever the kind uses.
    pub fn parameter(&self) -> f64 {
        match *self {
            Noise::SaltPepper { rho } => rho,
            Noise::GaussianNoise { sigma } | Noise::GaussianBlur { sigma } => sigma,
        }
    }

    /// Blur ignores the seed.
    pub fn is_random(&self) -> bool {
        !matches!(self, Noise::GaussianBlur { .. })
    }

    pub fn apply(&self, img: &GrayImage, seed: u64) -> Result<GrayImage> {
        match *self {
            Noise::SaltPepper { rho } => salt_pepper(img, rho, seed),
            Noise::GaussianNoise { sigma } => gaussian_noise(img, sigma, seed),
            Noise::GaussianBlur { sigma } => gaussian_blur(img, sigma),
        }
    }
}

impl NoiseSpec {
    pub fn apply(&self, img: &GrayImage) -> Result<GrayImage> {
        self.noise.apply(img, self.seed)
    }
}

fn check_density(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Param(format!("salt-and-pepper density {rho} outside [0, 1]")))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Param(format!("standard deviation {sigma} must be positive and finite")))
    }
}

/// Corrupts each pixel independently with probability `rho`, replacing it by
/// 0 or 255 with equal probability.
pub fn salt_pepper(img: &GrayImage, rho: f64, seed: u64) -> Result<GrayImage> {
    salt_pepper_with_truth(img, rho, seed).map(|(out, _)| out)
}

/// Like [`salt_pepper`], also returning which positions were hit.
pub fn salt_pepper_with_truth(img: &GrayImage, rho: f64, seed: u64) -> Result<(GrayImage, Vec<bool>)> {
    check_density(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hit = vec![false; img.len()];
    let mut out = img.clone().into_pixels();
    for (p, h) in out.iter_mut().zip(hit.iter_mut()) {
        if rng.random::<f64>() < rho {
            *h = true;
            *p = if rng.random::<bool>() { 255 } else { 0 };
        }
    }
    Ok((GrayImage::new(img.width(), img.height(), out)?, hit))
}

/// Adds N(0, sigma) to each pixel, rounds to the nearest integer, then clamps to [0, 255].
pub fn gaussian_noise(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    check_sigma(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(img.map(|p| {
        let z: f64 = rng.sample(StandardNormal);
        (f64::from(p) + sigma * z).round().clamp(0.0, 255.0) as u8
    }))
}

/// Normalized 1-D Gaussian weights over `-radius..=radius` with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    check_sigma(sigma)?;
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    Ok(k)
}

/// Separable Gaussian smoothing with replicate-edge borders, rounded per pixel.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width(), img.height());

    let mut horizontal = vec![0.0f64; w * h];
    for r in 0..h {
        for c in 0..w {
            horizontal[r * w + c] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * f64::from(img.get(r, clamp_index(c as isize + i as isize - radius, w))))
                .sum();
        }
    }
    GrayImage::from_fn(w, h, |r, c| {
        let v: f64 = kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal[clamp_index(r as isize + i as isize - radius, h) * w + c])
            .sum();
        v.round().clamp(0.0, 255.0) as u8
    })
}
