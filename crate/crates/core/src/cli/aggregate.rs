use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::runner::{
    csv_err, csv_writer, read_predictions, write_json, DistFile, CONFIG_FILE, DIST_FILE, PARTIAL_MARKER,
    PREDICTIONS_FILE, TRACE_FILE,
};
use crate::error::{check_len, Error, Result};
use crate::eval::{aggregate_runs, total_variation_distance, uniform_over, Ordering};
use crate::train::{accuracy, Accuracy, RunTrace};

pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const AGGREGATE_JSON: &str = "aggregate.json";

/// Contents of `aggregate.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AggregateReport {
    Qgan(QganAggregate),
    Supervised(SupervisedAggregate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QganAggregate {
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub final_loss_d_mean: f64,
    pub final_loss_g_mean: f64,
    pub ordering: Ordering,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    /// Per-bin mean and variance across runs, in `ordering`.
    pub hist_mean: Vec<f64>,
    pub hist_var: Vec<f64>,
    /// TVD between the mean histogram and the uniform distribution over the
    /// training set, when all runs share one training set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tvd_mean_to_training: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedAggregate {
    pub n_runs: usize,
    pub seeds: Vec<u64>,
    pub mean_accuracy: Accuracy,
    pub runs: Vec<Accuracy>,
    /// Prediction statistics per input, sorted by bit string.
    pub inputs: Vec<InputStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputStats {
    pub bits: String,
    pub label: u8,
    pub runs: usize,
    pub y_mean: f64,
    pub y_var: f64,
}

/// Completed run directories under `dir`, in name order.
fn completed_runs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut runs = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() && path.join(CONFIG_FILE).is_file() && !path.join(PARTIAL_MARKER).exists() {
            runs.push(path);
        }
    }
    runs.sort();
    if runs.is_empty() {
        return Err(Error::Empty("completed runs"));
    }
    Ok(runs)
}

fn read_columns(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Config(format!("{}: expected columns {header:?}, found {found:?}", path.display())));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            col.push(field.parse().map_err(|_| {
                Error::Config(format!("{}: bad number {field:?}", path.display()))
            })?);
        }
    }
    Ok(cols)
}

fn mean_std(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let len = rows[0].len();
    let mean: Vec<f64> = (0..len).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n).collect();
    let std = (0..len)
        .map(|i| (rows.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    (mean, std)
}

fn write_curves(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv_writer(BufWriter::new(File::create(path)?));
    w.write_record(header).map_err(csv_err)?;
    for step in 0..columns[0].len() {
        let mut row = vec![step.to_string()];
        row.extend(columns.iter().map(|c| format!("{}", c[step])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates every completed run in `dir` into `aggregate.{csv,json}`.
/// Output bytes depend only on the run files, so repeating it is a no-op.
pub fn aggregate_dir(dir: &Path) -> Result<AggregateReport> {
    let runs = completed_runs(dir)?;
    let config: ExperimentConfig = serde_json::from_str(&fs::read_to_string(runs[0].join(CONFIG_FILE))?)?;
    let report = match config.experiment {
        Some(Experiment::Qgan(_)) => AggregateReport::Qgan(aggregate_qgan(dir, &runs)?),
        Some(Experiment::Supervised(_)) => AggregateReport::Supervised(aggregate_supervised(dir, &runs)?),
        None => return Err(Error::Config(format!("{}: no experiment recorded", runs[0].display()))),
    };
    write_json(&dir.join(AGGREGATE_JSON), &report)?;
    Ok(report)
}

fn aggregate_qgan(dir: &Path, runs: &[PathBuf]) -> Result<QganAggregate> {
    let mut traces = Vec::new();
    let mut dists = Vec::new();
    for run in runs {
        let cols = read_columns(&run.join(TRACE_FILE), &["step", "loss_d", "loss_g"])?;
        let dist: DistFile = serde_json::from_str(&fs::read_to_string(run.join(DIST_FILE))?)?;
        traces.push(RunTrace {
            seed: dist.seed,
            loss_d: cols[1].clone(),
            loss_g: cols[2].clone(),
            discriminator_updates: 0,
            generator_updates: 0,
            generator_params: Vec::new(),
            discriminator_params: Vec::new(),
            distribution: dist.histogram.basis_probs(),
        });
        dists.push(dist);
    }
    if traces.iter().any(RunTrace::is_empty) {
        return Err(Error::Empty("loss trace"));
    }
    let agg = aggregate_runs(&traces)?;
    write_curves(
        &dir.join(AGGREGATE_CSV),
        &["step", "loss_d_mean", "loss_d_std", "loss_g_mean", "loss_g_std"],
        &[&agg.loss_d_mean, &agg.loss_d_std, &agg.loss_g_mean, &agg.loss_g_std],
    )?;
    let first = &dists[0];
    let (hist_mean, hist_var) = match &first.histogram.indices {
        Some(idx) => (
            idx.iter().map(|&i| agg.hist_mean[i]).collect(),
            idx.iter().map(|&i| agg.hist_var[i]).collect(),
        ),
        None => (agg.hist_mean.clone(), agg.hist_var.clone()),
    };
    let shared = dists.iter().all(|d| d.training == first.training);
    let tvd_mean_to_training = if shared {
        let n_bits = first.histogram.n_bits();
        check_len("training bits", n_bits, first.training[0].len())?;
        Some(total_variation_distance(&agg.hist_mean, &uniform_over(&first.training, n_bits))?)
    } else {
        None
    };
    let mut seeds: Vec<u64> = traces.iter().map(|t| t.seed).collect();
    seeds.sort_unstable();
    Ok(QganAggregate {
        n_runs: agg.n_runs,
        seeds,
        final_loss_d_mean: *agg.loss_d_mean.last().expect("nonempty"),
        final_loss_g_mean: *agg.loss_g_mean.last().expect("nonempty"),
        ordering: first.histogram.ordering,
        indices: first.histogram.indices.clone(),
        hist_mean,
        hist_var,
        tvd_mean_to_training,
    })
}

fn aggregate_supervised(dir: &Path, runs: &[PathBuf]) -> Result<SupervisedAggregate> {
    let mut losses = Vec::new();
    let mut accs = Vec::new();
    let mut seeds = Vec::new();
    let mut per_input: BTreeMap<String, (u8, Vec<f64>)> = BTreeMap::new();
    for run in runs {
        let cols = read_columns(&run.join(TRACE_FILE), &["step", "loss"])?;
        if let Some(first) = losses.first() {
            check_len("loss trace", Vec::len(first), cols[1].len())?;
        }
        losses.push(cols[1].clone());
        let preds = read_predictions(&run.join(PREDICTIONS_FILE))?;
        accs.push(accuracy(&preds));
        for p in preds {
            per_input.entry(p.bits.to_string()).or_insert((p.label, Vec::new())).1.push(p.y_pred);
        }
        let name = run.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        seeds.push(name.parse::<u64>().map_err(|_| {
            Error::Config(format!("{}: run directory is not named by its seed", run.display()))
        })?);
    }
    if losses[0].is_empty() {
        return Err(Error::Empty("loss trace"));
    }
    let (mean, std) = mean_std(&losses);
    write_curves(&dir.join(AGGREGATE_CSV), &["step", "loss_mean", "loss_std"], &[&mean, &std])?;
    let n = accs.len() as f64;
    let avg = |f: fn(&Accuracy) -> f64| accs.iter().map(f).sum::<f64>() / n;
    let mean_accuracy = Accuracy {
        overall: avg(|a| a.overall),
        class0: avg(|a| a.class0),
        class1: avg(|a| a.class1),
        balanced: avg(|a| a.balanced),
    };
    let inputs = per_input
        .into_iter()
        .map(|(bits, (label, ys))| {
            let k = ys.len() as f64;
            let y_mean = ys.iter().sum::<f64>() / k;
            let y_var = ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / k;
            InputStats {
                bits,
                label,
                runs: ys.len(),
                y_mean,
                y_var,
            }
        })
        .collect();
    seeds.sort_unstable();
    Ok(SupervisedAggregate {
        n_runs: accs.len(),
        seeds,
        mean_accuracy,
        runs: accs,
        inputs,
    })
}
