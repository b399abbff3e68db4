use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rambp::experiment::{noise_seed, ExperimentConfig};
use rambp::{load_dataset, read_pgm, Noise};

fn rambp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rambp")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = rambp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synth(root: &Path) {
    ok(&["synth", "--out", root.to_str().unwrap(), "--per-class", "6", "--train-per-class", "3", "--size", "32", "--seed", "4"]);
}

#[test]
fn classify_output_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let data = data.to_str().unwrap();
    let run = |workers: &str, out: &Path| {
        ok(&[
            "classify", "--dataset", data, "--noise", "salt_pepper:0.3", "--noise", "gaussian_noise:5", "--trials", "2",
            "--split", "manifest:split.csv", "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        fs::read_to_string(out).unwrap()
    };
    let one = run("1", &dir.path().join("one.csv"));
    let four = run("4", &dir.path().join("four.csv"));
    assert_eq!(one, four);
    assert!(one.starts_with("descriptor,max_window,noise,param,trial,accuracy\n"));
    assert_eq!(one.lines().filter(|l| l.contains(",mean,")).count(), 2);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("one.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "classify --protocol noisy");
    assert_eq!(manifest["config"]["trials"], 2);
    let echoed: ExperimentConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    assert_eq!(echoed.noise, vec![Noise::SaltPepper { rho: 0.3 }, Noise::GaussianNoise { sigma: 5.0 }]);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"dataset": {:?}, "descriptor": "lbp", "noise": [{{"kind": "salt_pepper", "rho": 0.1}}], "trials": 1,
                "split": {{"policy": "random_half", "partitions": 3}}}}"#,
            data
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let noisy = ok(&["classify", "--config", cfg, "--descriptor", "mbp"]);
    assert!(noisy.lines().skip(1).all(|l| l.starts_with("mbp,5,salt_pepper,0.1,")), "{noisy}");

    let free = ok(&["classify", "--config", cfg, "--protocol", "noise-free", "--partitions", "2"]);
    assert_eq!(free.lines().filter(|l| l.starts_with("lbp,5,none,0,")).count(), 3);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"dataset": "x", "colour": true}"#).unwrap();
    assert!(!rambp(&["classify", "--config", bad.to_str().unwrap()]).status.success());
    assert!(!rambp(&["classify"]).status.success());
    assert!(!rambp(&["classify", "--dataset", "x", "--k", "2"]).status.success());
}

#[test]
fn extract_writes_features_and_debug_images() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let debug = dir.path().join("debug");
    let csv = ok(&["extract", "--dataset", data.to_str().unwrap(), "--debug-dir", debug.to_str().unwrap()]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 2 + 256);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], ["grating_000/000.pgm", "grating_000"]);
    let total: f64 = row[2..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 1 + 30);

    for suffix in ["mask", "threshold", "ws"] {
        let img = read_pgm(&fs::read(debug.join(format!("mixture/005.{suffix}.pgm"))).unwrap()).unwrap();
        assert_eq!((img.width(), img.height()), (32, 32));
    }

    let lbp = ok(&["extract", "--dataset", data.to_str().unwrap(), "--descriptor", "lbp_riu2"]);
    assert_eq!(lbp.lines().next().unwrap().split(',').count(), 2 + 10);
}

#[test]
fn noise_command_reproduces_protocol_images() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let out = dir.path().join("noisy");
    ok(&[
        "noise", "--input", data.to_str().unwrap(), "--noise", "salt_pepper:0.2", "--seed", "9", "--trial", "1",
        "--out", out.to_str().unwrap(),
    ]);
    let clean = load_dataset(&data).unwrap();
    let noisy = load_dataset(&out).unwrap();
    let noise = Noise::SaltPepper { rho: 0.2 };
    for (i, (c, n)) in clean.samples().iter().zip(noisy.samples()).enumerate() {
        assert_eq!(c.path, n.path);
        assert_eq!(n.image, noise.apply(&c.image, noise_seed(9, "salt_pepper", 0.2, 1, i)).unwrap());
    }

    let single = dir.path().join("one.pgm");
    let input = data.join("mixture/000.pgm");
    ok(&["noise", "--input", input.to_str().unwrap(), "--noise", "gaussian_blur:1", "--out", single.to_str().unwrap()]);
    let blurred = read_pgm(&fs::read(&single).unwrap()).unwrap();
    assert_eq!(blurred.width(), 32);
    assert!(!rambp(&["noise", "--input", input.to_str().unwrap(), "--noise", "salt_pepper:2", "--out", "x.pgm"]).status.success());
}

#[test]
fn retrieve_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data);
    let data = data.to_str().unwrap();

    let curve = ok(&["retrieve", "--dataset", data, "--noise", "salt_pepper:0.1", "--trials", "1"]);
    let ks: Vec<usize> = curve.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(ks, (1..=29).step_by(2).collect::<Vec<_>>());
    let recall: Vec<f64> = curve.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert!(recall.windows(2).all(|w| w[0] <= w[1]));

    let picked = ok(&["retrieve", "--dataset", data, "--ks", "1,5", "--trials", "1"]);
    assert_eq!(picked.lines().count(), 3);

    let sweep = ok(&[
        "sweep-window", "--dataset", data, "--noise", "salt_pepper:0.4", "--trials", "1", "--sizes", "3,7",
        "--split", "manifest:split.csv",
    ]);
    let means: Vec<&str> = sweep.lines().filter(|l| l.contains(",mean,")).collect();
    assert_eq!(means.len(), 2);
    assert!(means[0].starts_with("rambp,3,") && means[1].starts_with("rambp,7,"));
}
