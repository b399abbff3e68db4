//! Train/test routing: seeded random halves, explicit manifests, leave-one-group-out.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, SplitPolicy};
use super::seed::derive_seed;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Sample indices (into the dataset) for each role.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

const SPLIT_STREAM: u64 = 0x0053_504c_4954;

/// Per class, shuffle with a seeded generator and send the first
/// `floor(n / 2)` to training.
pub fn random_half(dataset: &LabeledDataset, seed: u64, partition: usize) -> Result<Partition> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.classes().len()];
    for (i, s) in dataset.samples().iter().enumerate() {
        by_class[s.class].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[SPLIT_STREAM, partition as u64]));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Dataset {
                path: dataset.classes()[class].clone().into(),
                reason: format!("class has {} image(s); at least 2 are needed to split", members.len()),
            });
        }
        members.shuffle(&mut rng);
        let half = members.len() / 2;
        train.extend_from_slice(&members[..half]);
        test.extend_from_slice(&members[half..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Partition { train, test })
}

fn read_pairs(path: &Path, second: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!("{}: missing `{name}` column", path.display()))
        })
    };
    let (pc, sc) = (col("path")?, col(second)?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        rows.push((get(pc), get(sc)));
    }
    Ok(rows)
}

fn lookup(dataset: &LabeledDataset, manifest: &Path, rel: &str) -> Result<usize> {
    dataset.index_of_path(rel).ok_or_else(|| Error::Config(format!(
        "{}: `{rel}` is not an image of the dataset",
        manifest.display()
    )))
}

/// Parses a `path,role` manifest.
pub fn manifest_partition(dataset: &LabeledDataset, manifest: &Path) -> Result<Partition> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (rel, role) in read_pairs(manifest, "role")? {
        let idx = lookup(dataset, manifest, &rel)?;
        match role.as_str() {
            "train" => train.push(idx),
            "test" => test.push(idx),
            other => {
                return Err(Error::Config(format!(
                    "{}: role `{other}` for `{rel}` must be train or test",
                    manifest.display()
                )))
            }
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Config(format!("{}: both roles need at least one image", manifest.display())));
    }
    Ok(Partition { train, test })
}

/// Parses a `path,group` manifest into one fold per group, in group-name order.
pub fn group_partitions(dataset: &LabeledDataset, manifest: &Path) -> Result<Vec<Partition>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (rel, group) in read_pairs(manifest, "group")? {
        groups.entry(group).or_default().push(lookup(dataset, manifest, &rel)?);
    }
    if groups.len() < 2 {
        return Err(Error::Config(format!("{}: at least two groups are needed", manifest.display())));
    }
    Ok(groups
        .keys()
        .map(|held_out| Partition {
            test: groups[held_out].clone(),
            train: groups
                .iter()
                .filter(|(g, _)| *g != held_out)
                .flat_map(|(_, members)| members.iter().copied())
                .collect(),
        })
        .collect())
}

/// All partitions the configured policy produces.
pub fn partitions(cfg: &ExperimentConfig, dataset: &LabeledDataset) -> Result<Vec<Partition>> {
    match &cfg.split {
        SplitPolicy::RandomHalf { partitions } => (0..*partitions).map(|p| random_half(dataset, cfg.seed, p)).collect(),
        SplitPolicy::Manifest { path } => Ok(vec![manifest_partition(dataset, &cfg.resolve(path))?]),
        SplitPolicy::GroupOut { path } => group_partitions(dataset, &cfg.resolve(path)),
    }
}

/// The first partition only, which is what the noisy protocols use.
pub fn first_partition(cfg: &ExperimentConfig, dataset: &LabeledDataset) -> Result<Partition> {
    match &cfg.split {
        SplitPolicy::RandomHalf { .. } => random_half(dataset, cfg.seed, 0),
        _ => Ok(partitions(cfg, dataset)?.swap_remove(0)),
    }
}
