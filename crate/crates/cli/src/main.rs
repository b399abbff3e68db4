//! `rambp`: feature extraction, noise injection and texture experiments from the shell.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rambp::experiment::{
    features_csv, first_partition, noise_free_classification, noise_seed, noisy_classification, retrieval,
    retrieval_csv, window_sweep, with_workers, write_synth_dataset, ExperimentConfig, RunManifest, SplitPolicy,
    SynthConfig,
};
use rambp::metrics::odd_ks;
use rambp::{load_dataset, rambp_analyze, read_pgm, write_pgm, Descriptor, GrayImage, LabeledDataset, Noise};

#[derive(Parser)]
#[command(name = "rambp", version, about = "Noise-robust texture descriptors and evaluation protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one feature histogram per dataset image as CSV.
    Extract {
        #[command(flatten)]
        run: RunArgs,
        /// Also dump the detection mask, thresholds and window sizes of every image as PGM.
        #[arg(long)]
        debug_dir: Option<PathBuf>,
    },
    /// Degrade a PGM image, or every image of a dataset, and write the result.
    Noise {
        /// A PGM file or a dataset root.
        #[arg(long)]
        input: PathBuf,
        /// Degradation as `kind:param`, e.g. `salt_pepper:0.3`.
        #[arg(long, value_parser = parse_noise)]
        noise: Noise,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trial index; with a dataset input this reproduces the images a protocol run degrades.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Output file, or output root for a dataset input.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the noisy or noise-free classification protocol.
    Classify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Protocol::Noisy)]
        protocol: Protocol,
    },
    /// Precision/recall of every image, degraded, queried against the clean dataset.
    Retrieve {
        #[command(flatten)]
        run: RunArgs,
        /// Odd cutoffs; defaults to 1, 3, ..., 39 limited to the dataset size.
        #[arg(long, value_delimiter = ',')]
        ks: Vec<usize>,
    },
    /// Noisy classification repeated for several maximum window sizes.
    SweepWindow {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [3, 5, 7])]
        sizes: Vec<usize>,
    },
    /// Generate the synthetic texture set with its split manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        per_class: Option<usize>,
        #[arg(long)]
        train_per_class: Option<usize>,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Protocol {
    Noisy,
    NoiseFree,
}

/// Experiment settings; flags override the `--config` document.
#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset root holding one directory of PGM images per class.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// `rambp`, `lbp`, `lbp_riu2` or `mbp`.
    #[arg(long)]
    descriptor: Option<Descriptor>,
    /// Largest adaptive window width (odd, at least 3).
    #[arg(long)]
    max_window: Option<usize>,
    /// Degradation as `kind:param`; repeatable.
    #[arg(long = "noise", value_parser = parse_noise)]
    noise: Vec<Noise>,
    /// Noise draws per setting.
    #[arg(long)]
    trials: Option<usize>,
    /// Neighbors voting in k-NN classification (odd).
    #[arg(long)]
    k: Option<usize>,
    /// Master seed for noise and random splits.
    #[arg(long)]
    seed: Option<u64>,
    /// `random_half`, `manifest:<csv>` or `group_out:<csv>`.
    #[arg(long)]
    split: Option<String>,
    /// Partitions drawn by `random_half`.
    #[arg(long)]
    partitions: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output CSV; a `.manifest.json` is written next to it. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_noise(s: &str) -> Result<Noise, String> {
    let (kind, value) = s.split_once(':').ok_or_else(|| format!("expected kind:param, got `{s}`"))?;
    let value: f64 = value.parse().map_err(|e| format!("bad parameter `{value}`: {e}"))?;
    let noise = match kind {
        "salt_pepper" => Noise::SaltPepper { rho: value },
        "gaussian_noise" => Noise::GaussianNoise { sigma: value },
        "gaussian_blur" => Noise::GaussianBlur { sigma: value },
        _ => return Err(format!("unknown noise kind `{kind}` (salt_pepper, gaussian_noise, gaussian_blur)")),
    };
    noise.validate().map_err(|e| e.to_string())?;
    Ok(noise)
}

fn parse_split(s: &str, partitions: Option<usize>) -> Result<SplitPolicy> {
    Ok(match s.split_once(':') {
        None if s == "random_half" => SplitPolicy::RandomHalf {
            partitions: partitions.unwrap_or(100),
        },
        Some(("manifest", path)) => SplitPolicy::Manifest { path: path.into() },
        Some(("group_out", path)) => SplitPolicy::GroupOut { path: path.into() },
        _ => bail!("unknown split `{s}` (random_half, manifest:<csv>, group_out:<csv>)"),
    })
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.dataset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(dataset)) => ExperimentConfig::new(dataset),
            (None, None) => bail!("either --config or --dataset is required"),
        };
        if let Some(d) = &self.dataset {
            cfg.dataset = d.clone();
        }
        if let Some(d) = self.descriptor {
            cfg.descriptor = d;
        }
        if let Some(w) = self.max_window {
            cfg.max_window = w;
        }
        if !self.noise.is_empty() {
            cfg.noise = self.noise.clone();
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        match (&self.split, self.partitions) {
            (Some(s), p) => cfg.split = parse_split(s, p)?,
            (None, Some(p)) => match &mut cfg.split {
                SplitPolicy::RandomHalf { partitions } => *partitions = p,
                _ => bail!("--partitions applies to the random_half split only"),
            },
            (None, None) => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn dataset(&self, cfg: &ExperimentConfig) -> Result<LabeledDataset> {
        load_dataset(&cfg.dataset).with_context(|| format!("loading dataset {}", cfg.dataset.display()))
    }

    /// Runs `f` on the worker pool, then writes its CSV and the run manifest.
    fn finish(&self, command: &str, cfg: &ExperimentConfig, f: impl FnOnce() -> Result<String> + Send) -> Result<()> {
        let csv = with_workers(self.workers, f)??;
        match &self.out {
            None => print!("{csv}"),
            Some(path) => {
                write_file(path, csv.as_bytes())?;
                let mut manifest = RunManifest::new(command, cfg);
                manifest.outputs.push(path.display().to_string());
                write_file(&manifest_path(path), manifest.to_json().as_bytes())?;
            }
        }
        Ok(())
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_pgm(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn dump_debug(dir: &Path, dataset: &LabeledDataset, cfg: &ExperimentConfig) -> Result<()> {
    for sample in dataset.samples() {
        let a = rambp_analyze(&sample.image, cfg.params())?;
        let stem = dir.join(sample.path.trim_end_matches(".pgm"));
        for (suffix, img) in [
            ("mask", a.mask.to_image()),
            ("threshold", a.thresholds.thresholds_image()),
            ("ws", a.thresholds.window_sizes_image()),
        ] {
            write_file(&stem.with_extension(format!("{suffix}.pgm")), &write_pgm(&img, false))?;
        }
    }
    Ok(())
}

fn noise_command(input: &Path, noise: Noise, seed: u64, trial: usize, out: &Path) -> Result<()> {
    if input.is_dir() {
        let ds = load_dataset(input)?;
        for (i, sample) in ds.samples().iter().enumerate() {
            let s = noise_seed(seed, noise.kind_name(), noise.parameter(), trial, i);
            write_file(&out.join(&sample.path), &write_pgm(&noise.apply(&sample.image, s)?, false))?;
        }
        eprintln!("wrote {} images under {}", ds.len(), out.display());
    } else {
        let img = read_image(input)?;
        write_file(out, &write_pgm(&noise.apply(&img, seed)?, false))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract { run, debug_dir } => {
            let cfg = run.config()?;
            let ds = run.dataset(&cfg)?;
            if let Some(dir) = &debug_dir {
                with_workers(run.workers, || dump_debug(dir, &ds, &cfg))??;
            }
            run.finish("extract", &cfg, || Ok(features_csv(&ds, cfg.descriptor, cfg.params())?))
        }
        Command::Noise {
            input,
            noise,
            seed,
            trial,
            out,
        } => noise_command(&input, noise, seed, trial, &out),
        Command::Classify { run, protocol } => {
            let cfg = run.config()?;
            let ds = run.dataset(&cfg)?;
            match protocol {
                Protocol::Noisy => run.finish("classify --protocol noisy", &cfg, || {
                    let split = first_partition(&cfg, &ds)?;
                    Ok(noisy_classification(&cfg, &ds, &split)?.to_csv())
                }),
                Protocol::NoiseFree => run.finish("classify --protocol noise-free", &cfg, || {
                    Ok(noise_free_classification(&cfg, &ds)?.to_csv())
                }),
            }
        }
        Command::Retrieve { run, ks } => {
            let cfg = run.config()?;
            let ds = run.dataset(&cfg)?;
            let ks = if ks.is_empty() { odd_ks(39.min(ds.len())) } else { ks };
            run.finish("retrieve", &cfg, || Ok(retrieval_csv(&retrieval(&cfg, &ds, &ks)?)))
        }
        Command::SweepWindow { run, sizes } => {
            let cfg = run.config()?;
            let ds = run.dataset(&cfg)?;
            run.finish("sweep-window", &cfg, || {
                let split = first_partition(&cfg, &ds)?;
                Ok(window_sweep(&cfg, &ds, &split, &sizes)?.to_csv())
            })
        }
        Command::Synth {
            out,
            per_class,
            train_per_class,
            size,
            seed,
        } => {
            let defaults = SynthConfig::default();
            let cfg = SynthConfig {
                per_class: per_class.unwrap_or(defaults.per_class),
                train_per_class: train_per_class.unwrap_or(defaults.train_per_class),
                size: size.unwrap_or(defaults.size),
                seed: seed.unwrap_or(defaults.seed),
            };
            let (ds, _) = write_synth_dataset(&cfg, &out)?;
            eprintln!("wrote {} images and split.csv under {}", ds.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    run(Cli::parse())
}
