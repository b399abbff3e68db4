//! Class-labeled image collections laid out as `root/<class>/<image>.pgm`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{read_pgm, write_pgm, GrayImage};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub class: usize,
    /// Path relative to the dataset root, always with '/' separators.
    pub path: String,
}

#[derive(Clone, Debug)]
pub struct LabeledDataset {
    classes: Vec<String>,
    samples: Vec<Sample>,
}

impl LabeledDataset {
    /// Checks that every class index is valid and every class owns a sample.
    pub fn new(classes: Vec<String>, samples: Vec<Sample>) -> Result<Self> {
        let mut seen = vec![false; classes.len()];
        for s in &samples {
            match seen.get_mut(s.class) {
                Some(flag) => *flag = true,
                None => {
                    return Err(Error::Dataset {
                        path: PathBuf::from(&s.path),
                        reason: format!("class index {} out of range ({} classes)", s.class, classes.len()),
                    })
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::Dataset {
                path: PathBuf::from(&classes[missing]),
                reason: "class has no images".into(),
            });
        }
        Ok(LabeledDataset { classes, samples })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.classes.len()];
        for s in &self.samples {
            sizes[s.class] += 1;
        }
        sizes
    }

    pub fn index_of_path(&self, path: &str) -> Option<usize> {
        self.samples.iter().position(|s| s.path == path)
    }

    /// Writes every sample as binary PGM under `root`, recreating the class layout.
    pub fn write_to(&self, root: &Path) -> Result<()> {
        for s in &self.samples {
            let path = root.join(&s.path);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|source| Error::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            fs::write(&path, write_pgm(&s.image, false)).map_err(|source| Error::Io { path, source })?;
        }
        Ok(())
    }
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut entries = fs::read_dir(dir)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(io_err)?;
    entries.sort();
    Ok(entries)
}

/// Loads `root/<class>/*.pgm`. Classes and files are sorted by name so the
/// sample order never depends on filesystem enumeration order. Files without
/// a `.pgm` extension are ignored.
pub fn load_dataset(root: &Path) -> Result<LabeledDataset> {
    let mut classes = Vec::new();
    let mut samples = Vec::new();
    for class_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = class_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Dataset {
                path: class_dir.clone(),
                reason: "class directory name is not valid UTF-8".into(),
            })?
            .to_string();
        let class = classes.len();
        let before = samples.len();
        for file in sorted_entries(&class_dir)?.into_iter().filter(|p| p.is_file() && is_pgm(p)) {
            let bytes = fs::read(&file).map_err(|source| Error::Io {
                path: file.clone(),
                source,
            })?;
            let image = read_pgm(&bytes).map_err(|source| Error::Pgm {
                path: file.clone(),
                source,
            })?;
            let fname = file.file_name().and_then(|n| n.to_str()).ok_or_else(|| Error::Dataset {
                path: file.clone(),
                reason: "file name is not valid UTF-8".into(),
            })?;
            samples.push(Sample {
                image,
                class,
                path: format!("{name}/{fname}"),
            });
        }
        if samples.len() == before {
            return Err(Error::Dataset {
                path: class_dir,
                reason: "class has no PGM images".into(),
            });
        }
        classes.push(name);
    }
    if classes.is_empty() {
        return Err(Error::Dataset {
            path: root.to_path_buf(),
            reason: "no class subdirectories found".into(),
        });
    }
    LabeledDataset::new(classes, samples)
}
