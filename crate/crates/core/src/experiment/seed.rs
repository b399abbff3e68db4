//! Stream seeds derived from the master seed by splitmix64 mixing.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds each word into the running state with one splitmix64 round.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    words.iter().fold(splitmix64(master), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// Seed of the noise applied to one test image in one trial.
pub fn noise_seed(master: u64, kind: &str, parameter: f64, trial: usize, image: usize) -> u64 {
    let tag = kind.bytes().fold(0u64, |h, b| h.wrapping_mul(0x100_0000_01b3) ^ u64::from(b));
    derive_seed(master, &[tag, parameter.to_bits(), trial as u64, image as u64])
}
