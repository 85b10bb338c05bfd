use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qganlab::cli::{DistFile, AGGREGATE_CSV, AGGREGATE_JSON, PARTIAL_MARKER};
use tempfile::TempDir;

const TINY_BS: &str = r#"{
  "name": "tiny-bs",
  "seeds": 2,
  "seed": 5,
  "experiment": {"qgan": {
    "dataset": "bars-and-stripes",
    "training": {
      "generator": {"kind": "reupload", "depth": 2},
      "discriminator": {"depth": 2},
      "iterations": 4,
      "n_critic": 2,
      "noise_batch": 3,
      "eval_noise_samples": 5
    },
    "evaluation": {"sample_noise": 2, "shots_per_noise": 3}
  }}
}"#;

const TINY_ISING: &str = r#"{
  "name": "tiny-ising",
  "experiment": {"qgan": {
    "dataset": {"ising-low-energy": {"n_spins": 6, "count": 8}},
    "training": {
      "generator": {"kind": "reupload", "depth": 1},
      "discriminator": {"depth": 1, "n_aux": 1},
      "iterations": 2,
      "n_critic": 1,
      "noise_batch": 2,
      "eval_noise_samples": 3
    },
    "evaluation": {"sample_noise": 2, "shots_per_noise": 4, "ordering": "energy_sorted"}
  }}
}"#;

fn qganlab(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qganlab"));
    cmd.args(args).env_remove("QGANLAB_SEED");
    if let Some(s) = env_seed {
        cmd.env("QGANLAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn run_ok(config: &Path, out: &Path, extra: &[&str], env_seed: Option<&str>) {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = qganlab(&args, env_seed);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn seed_dirs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    v
}

#[test]
fn presets_lists_required_names() {
    let o = qganlab(&["presets"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "disc-bs",
        "disc-ising-balanced",
        "disc-ising-imbalanced",
        "disc-ising-reduced",
        "qgan-toy-amplitude",
        "qgan-toy-mlp",
        "qgan-reupload-bs",
        "qgan-linear-noise-bs",
        "qgan-ising",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    assert!(text.lines().count() >= 9);
}

#[test]
fn run_layout_and_formats() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_BS);
    run_ok(&cfg, &tmp.path().join("out"), &[], None);
    let exp = tmp.path().join("out/tiny-bs");
    let runs = seed_dirs(&exp);
    assert_eq!(runs.len(), 2);
    for run in &runs {
        for f in ["trace.csv", "dist.json", "samples.csv", "config.json"] {
            assert!(run.join(f).is_file(), "{f}");
        }
        assert!(!run.join(PARTIAL_MARKER).exists());
        let trace = fs::read_to_string(run.join("trace.csv")).unwrap();
        assert!(!trace.contains('\r'));
        let mut lines = trace.lines();
        assert_eq!(lines.next(), Some("step,loss_d,loss_g"));
        assert_eq!(lines.count(), 4);
        let samples = fs::read_to_string(run.join("samples.csv")).unwrap();
        assert!(samples.starts_with("bits,energy\n"));
        assert_eq!(samples.lines().count(), 1 + 2 * 3);
        let dist: DistFile = serde_json::from_str(&fs::read_to_string(run.join("dist.json")).unwrap()).unwrap();
        assert!((dist.histogram.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    let agg = fs::read_to_string(exp.join(AGGREGATE_CSV)).unwrap();
    assert!(agg.starts_with("step,loss_d_mean,loss_d_std,loss_g_mean,loss_g_std\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(exp.join(AGGREGATE_JSON)).unwrap()).unwrap();
    let hist: Vec<f64> = serde_json::from_value(json["hist_mean"].clone()).unwrap();
    assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_BS);
    run_ok(&cfg, &tmp.path().join("a"), &["--jobs", "2"], None);
    run_ok(&cfg, &tmp.path().join("b"), &[], None);
    let (a, b) = (seed_dirs(&tmp.path().join("a/tiny-bs")), seed_dirs(&tmp.path().join("b/tiny-bs")));
    assert_eq!(a.iter().map(|p| p.file_name()).collect::<Vec<_>>(), b.iter().map(|p| p.file_name()).collect::<Vec<_>>());
    for (x, y) in a.iter().zip(&b) {
        for f in ["trace.csv", "dist.json", "samples.csv", "config.json"] {
            assert_eq!(fs::read(x.join(f)).unwrap(), fs::read(y.join(f)).unwrap(), "{f}");
        }
    }
    for f in [AGGREGATE_CSV, AGGREGATE_JSON] {
        assert_eq!(fs::read(tmp.path().join("a/tiny-bs").join(f)).unwrap(), fs::read(tmp.path().join("b/tiny-bs").join(f)).unwrap());
    }
}

#[test]
fn env_seed_overrides_master_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_BS);
    run_ok(&cfg, &tmp.path().join("a"), &["--seeds", "1"], None);
    run_ok(&cfg, &tmp.path().join("b"), &["--seeds", "1"], Some("6"));
    let a = seed_dirs(&tmp.path().join("a/tiny-bs"));
    let b = seed_dirs(&tmp.path().join("b/tiny-bs"));
    assert_eq!((a.len(), b.len()), (1, 1));
    assert_ne!(a[0].file_name(), b[0].file_name());
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(b[0].join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["seed"], 6);
    let bad = qganlab(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], Some("x"));
    assert!(!bad.status.success());
}

#[test]
fn config_echo_reruns_one_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_BS);
    run_ok(&cfg, &tmp.path().join("a"), &[], None);
    let second = &seed_dirs(&tmp.path().join("a/tiny-bs"))[1];
    run_ok(&second.join("config.json"), &tmp.path().join("b"), &[], None);
    let rerun = seed_dirs(&tmp.path().join("b/tiny-bs"));
    assert_eq!(rerun.len(), 1);
    assert_eq!(rerun[0].file_name(), second.file_name());
    assert_eq!(fs::read(rerun[0].join("trace.csv")).unwrap(), fs::read(second.join("trace.csv")).unwrap());
}

#[test]
fn ising_run_records_energies_in_energy_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_ISING);
    run_ok(&cfg, &tmp.path().join("out"), &[], None);
    let run = &seed_dirs(&tmp.path().join("out/tiny-ising"))[0];
    let dist: DistFile = serde_json::from_str(&fs::read_to_string(run.join("dist.json")).unwrap()).unwrap();
    assert_eq!(dist.histogram.indices.as_ref().unwrap()[..2], [21, 42]);
    assert_eq!(dist.training.len(), 8);
    assert!(dist.metrics.sample_energy.is_some());
    let samples = fs::read_to_string(run.join("samples.csv")).unwrap();
    for line in samples.lines().skip(1) {
        let (bits, energy) = line.split_once(',').unwrap();
        assert_eq!(bits.len(), 6);
        energy.parse::<f64>().unwrap();
    }
}

#[test]
fn invalid_configs_fail_with_a_diagnostic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"preset": "disc-bs", "learning_rate": 1}"#);
    let o = qganlab(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], None);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("learning_rate"));
    let o = qganlab(&["run", "--preset", "no-such-preset"], None);
    assert!(!o.status.success());
    assert!(!qganlab(&["run"], None).status.success());
}

#[test]
fn failing_run_leaves_partial_marker() {
    let tmp = TempDir::new().unwrap();
    // the MLP generator emits 4-qubit states, which cannot feed 6-bit data
    let text = TINY_ISING.replace(r#""kind": "reupload", "depth": 1"#, r#""kind": "mlp""#);
    let cfg = write_config(tmp.path(), &text);
    let o = qganlab(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()], None);
    assert!(!o.status.success());
    let run = &seed_dirs(&tmp.path().join("tiny-ising"))[0];
    let marker = fs::read_to_string(run.join(PARTIAL_MARKER)).unwrap();
    assert!(marker.contains("failed"));
}

#[test]
fn aggregate_is_idempotent_and_needs_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY_BS);
    run_ok(&cfg, &tmp.path().join("out"), &["--seeds", "1"], None);
    let exp = tmp.path().join("out/tiny-bs");
    let before = fs::read(exp.join(AGGREGATE_JSON)).unwrap();
    let o = qganlab(&["aggregate", exp.to_str().unwrap()], None);
    assert!(o.status.success());
    assert_eq!(fs::read(exp.join(AGGREGATE_JSON)).unwrap(), before);
    // one run: every std column is zero
    let csv = fs::read_to_string(exp.join(AGGREGATE_CSV)).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!((cols[2], cols[4]), ("0", "0"));
    }
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert!(!qganlab(&["aggregate", empty.to_str().unwrap()], None).status.success());
}

#[test]
fn supervised_preset_writes_predictions() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"name": "bs", "seeds": 1, "experiment": {"supervised": {
            "dataset": "bars-and-stripes",
            "discriminator": {"depth": 3},
            "training": {"steps": 5}}}}"#,
    );
    run_ok(&cfg, &tmp.path().join("out"), &[], None);
    let run = &seed_dirs(&tmp.path().join("out/bs"))[0];
    let preds = fs::read_to_string(run.join("predictions.csv")).unwrap();
    assert!(preds.starts_with("bits,label,y_pred,energy\n"));
    assert_eq!(preds.lines().count(), 17);
    let trace = fs::read_to_string(run.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
}

#[test]
fn samples_file_is_header_only_without_sampling() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &TINY_BS.replace(r#""evaluation": {"sample_noise": 2, "shots_per_noise": 3}"#, r#""evaluation": {}"#));
    run_ok(&cfg, &tmp.path().join("out"), &[], None);
    for run in seed_dirs(&tmp.path().join("out/tiny-bs")) {
        assert_eq!(fs::read_to_string(run.join("samples.csv")).unwrap(), "bits,energy\n");
    }
}
