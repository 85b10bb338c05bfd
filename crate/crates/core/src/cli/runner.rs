use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_dir, AggregateReport};
use super::config::{
    Experiment, QganData, QganExperiment, ResolvedExperiment, SupervisedData, SupervisedExperiment,
};
use crate::circuits::DiscriminatorSpec;
use crate::data::{
    bars_and_stripes_2x2, bars_and_stripes_task, labeled_split, select_training_states, IsingInstance,
    LabeledDataset,
};
use crate::error::{Error, Result};
use crate::eval::{
    energy_statistics, mode_collapse_metric, sample_generator, total_variation_distance, uniform_over,
    DistributionHistogram, EnergySource, EnergyStats, Ordering,
};
use crate::statevec::BitString;
use crate::train::{
    accuracy, derive_seed, train_discriminator_supervised, train_qgan_with, Accuracy, Prediction, RunTrace,
};

/// Present in a run directory until the run has finished successfully.
pub const PARTIAL_MARKER: &str = "PARTIAL";
pub const CONFIG_FILE: &str = "config.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const DIST_FILE: &str = "dist.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const METRICS_FILE: &str = "metrics.json";

// sub-streams of a run seed
const DATA_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const SAMPLE_STREAM: u64 = 3;

/// Seed of run `index` of a sweep.
pub fn run_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

/// Contents of `dist.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistFile {
    pub seed: u64,
    #[serde(flatten)]
    pub histogram: DistributionHistogram,
    pub training: Vec<BitString>,
    pub metrics: QganMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QganMetrics {
    pub final_loss_d: f64,
    pub final_loss_g: f64,
    /// Distance to the uniform distribution over the training states.
    pub tvd_to_training: f64,
    pub min_training_prob: f64,
    pub max_training_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_mean_energy: Option<f64>,
    /// Exact mean energy of the histogram.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_energy: Option<EnergyStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_energy: Option<EnergyStats>,
    /// Sample energy with the training states removed; absent when every
    /// shot hit a training state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_energy_novel: Option<EnergyStats>,
}

#[derive(Debug, Clone)]
pub struct QganOutcome {
    pub index: usize,
    pub seed: u64,
    pub trace: RunTrace,
    pub training: Vec<BitString>,
    pub histogram: DistributionHistogram,
    pub metrics: QganMetrics,
}

#[derive(Debug, Clone)]
pub struct SupervisedOutcome {
    pub index: usize,
    pub seed: u64,
    pub losses: Vec<f64>,
    pub steps_run: usize,
    pub predictions: Vec<Prediction>,
    pub accuracy: Accuracy,
}

#[derive(Debug, Clone)]
pub enum SeedOutcome {
    Supervised(SupervisedOutcome),
    Qgan(QganOutcome),
}

impl SeedOutcome {
    pub fn seed(&self) -> u64 {
        match self {
            SeedOutcome::Supervised(o) => o.seed,
            SeedOutcome::Qgan(o) => o.seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub runs: Vec<SeedOutcome>,
    pub aggregate: AggregateReport,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs every seed of the sweep (at most `jobs` at a time), then aggregates
/// all completed runs in the experiment directory.
pub fn run_experiment(resolved: &ResolvedExperiment, jobs: usize) -> Result<SweepOutcome> {
    let dir = resolved.out.join(&resolved.name);
    fs::create_dir_all(&dir)?;
    let indices: Vec<usize> = match resolved.run {
        Some(i) => vec![i],
        None => (0..resolved.seeds).collect(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<SeedOutcome>> =
        pool.install(|| indices.par_iter().map(|&i| run_one(resolved, &dir, i)).collect());
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate_dir(&dir)?;
    Ok(SweepOutcome { dir, runs, aggregate })
}

fn run_one(resolved: &ResolvedExperiment, dir: &Path, index: usize) -> Result<SeedOutcome> {
    let seed = run_seed(resolved.master_seed, index);
    let run_dir = dir.join(seed.to_string());
    fs::create_dir_all(&run_dir)?;
    let marker = run_dir.join(PARTIAL_MARKER);
    fs::write(&marker, "run started\n")?;
    write_json(&run_dir.join(CONFIG_FILE), &resolved.echo(index))?;
    let result = match &resolved.experiment {
        Experiment::Supervised(e) => run_supervised(e, &run_dir, index, seed).map(SeedOutcome::Supervised),
        Experiment::Qgan(e) => run_qgan(e, &run_dir, index, seed).map(SeedOutcome::Qgan),
    };
    match &result {
        Ok(_) => fs::remove_file(&marker)?,
        Err(e) => fs::write(&marker, format!("run failed: {e}\n"))?,
    }
    result
}

fn supervised_dataset(data: &SupervisedData, seed: u64) -> Result<LabeledDataset> {
    match *data {
        SupervisedData::BarsAndStripes => Ok(bars_and_stripes_task()),
        SupervisedData::Ising { n_spins, split } => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, DATA_STREAM));
            labeled_split(&IsingInstance::chain(n_spins)?, split, &mut rng)
        }
    }
}

fn run_supervised(e: &SupervisedExperiment, run_dir: &Path, index: usize, seed: u64) -> Result<SupervisedOutcome> {
    let dataset = supervised_dataset(&e.dataset, seed)?;
    let n_data = dataset.items[0].bits.len();
    let d = &e.discriminator;
    let init = DiscriminatorSpec::<f64>::random(
        n_data,
        d.n_aux,
        d.depth,
        d.entangler,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )?;
    let report = train_discriminator_supervised(init, &dataset, &e.training, derive_seed(seed, TRAIN_STREAM))?;

    let mut w = csv_writer(BufWriter::new(File::create(run_dir.join(TRACE_FILE))?));
    w.write_record(["step", "loss"]).map_err(csv_err)?;
    for (step, loss) in report.losses.iter().enumerate() {
        w.write_record([step.to_string(), fmt(*loss)]).map_err(csv_err)?;
    }
    w.flush()?;
    write_predictions(&run_dir.join(PREDICTIONS_FILE), &report.predictions)?;
    write_json(
        &run_dir.join(METRICS_FILE),
        &serde_json::json!({
            "seed": seed,
            "steps_run": report.steps_run,
            "accuracy": report.accuracy,
        }),
    )?;
    Ok(SupervisedOutcome {
        index,
        seed,
        losses: report.losses,
        steps_run: report.steps_run,
        predictions: report.predictions,
        accuracy: report.accuracy,
    })
}

pub(crate) fn write_predictions(path: &Path, predictions: &[Prediction]) -> Result<()> {
    let mut w = csv_writer(BufWriter::new(File::create(path)?));
    w.write_record(["bits", "label", "y_pred", "energy"]).map_err(csv_err)?;
    for p in predictions {
        w.write_record([
            p.bits.to_string(),
            p.label.to_string(),
            fmt(p.y_pred),
            p.energy.map(fmt).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let parse_err = || Error::Config(format!("{}: malformed row {:?}", path.display(), rec));
        out.push(Prediction {
            bits: field(0).parse().map_err(|_| parse_err())?,
            label: field(1).parse().map_err(|_| parse_err())?,
            y_pred: field(2).parse().map_err(|_| parse_err())?,
            energy: match field(3) {
                "" => None,
                s => Some(s.parse().map_err(|_| parse_err())?),
            },
        });
    }
    Ok(out)
}

fn run_qgan(e: &QganExperiment, run_dir: &Path, index: usize, seed: u64) -> Result<QganOutcome> {
    let (training, instance) = match e.dataset {
        QganData::BarsAndStripes => (bars_and_stripes_2x2(), None),
        QganData::IsingLowEnergy { n_spins, count, fraction } => {
            let inst = IsingInstance::chain(n_spins)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, DATA_STREAM));
            (select_training_states(&inst, count, fraction, &mut rng)?, Some(inst))
        }
    };
    let mut config = e.training.clone();
    config.seed = derive_seed(seed, TRAIN_STREAM);

    let mut w = csv_writer(BufWriter::new(File::create(run_dir.join(TRACE_FILE))?));
    w.write_record(["step", "loss_d", "loss_g"]).map_err(csv_err)?;
    let mut write_err = None;
    let run = train_qgan_with::<f64, _>(&config, &training, |step, ld, lg| {
        let row = w
            .write_record([step.to_string(), fmt(ld), fmt(lg)])
            .map_err(csv_err)
            .and_then(|_| w.flush().map_err(Error::from));
        if let Err(err) = row {
            write_err.get_or_insert(err);
        }
    })?;
    if let Some(err) = write_err {
        return Err(err);
    }
    drop(w);
    let mut trace = run.trace;
    trace.seed = seed;

    let basis = DistributionHistogram::from_probs(trace.distribution.clone())?;
    let (min_p, max_p) = mode_collapse_metric(&basis, &training)?;
    let mut metrics = QganMetrics {
        final_loss_d: *trace.loss_d.last().expect("at least one iteration"),
        final_loss_g: *trace.loss_g.last().expect("at least one iteration"),
        tvd_to_training: total_variation_distance(&basis.probs, &uniform_over(&training, basis.n_bits()))?,
        min_training_prob: min_p,
        max_training_prob: max_p,
        training_mean_energy: None,
        histogram_energy: None,
        sample_energy: None,
        sample_energy_novel: None,
    };
    if let Some(inst) = &instance {
        let energies = training.iter().map(|x| inst.energy(x)).collect::<Result<Vec<_>>>()?;
        metrics.training_mean_energy = Some(energies.iter().sum::<f64>() / energies.len() as f64);
        metrics.histogram_energy = Some(energy_statistics(EnergySource::Histogram(&basis), inst, &[])?);
    }

    let ev = &e.evaluation;
    // header only when sampling is off
    let mut w = csv_writer(BufWriter::new(File::create(run_dir.join(SAMPLES_FILE))?));
    w.write_record(["bits", "energy"]).map_err(csv_err)?;
    if ev.sample_noise > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SAMPLE_STREAM));
        let noise = run.generator.sample_noise(ev.sample_noise, &mut rng);
        let shots = sample_generator(&run.generator, &noise, ev.shots_per_noise, &mut rng)?;
        for x in &shots {
            let energy = match &instance {
                Some(inst) => fmt(inst.energy(x)?),
                None => String::new(),
            };
            w.write_record([x.to_string(), energy]).map_err(csv_err)?;
        }
        if let Some(inst) = &instance {
            metrics.sample_energy = Some(energy_statistics(EnergySource::Samples(&shots), inst, &[])?);
            metrics.sample_energy_novel = energy_statistics(EnergySource::Samples(&shots), inst, &training).ok();
        }
    }
    w.flush()?;

    let histogram = match (ev.ordering, &instance) {
        (Ordering::EnergySorted, Some(inst)) => basis.energy_sorted(inst)?,
        _ => basis,
    };
    let dist = DistFile {
        seed,
        histogram: histogram.clone(),
        training: training.clone(),
        metrics: metrics.clone(),
    };
    write_json(&run_dir.join(DIST_FILE), &dist)?;
    Ok(QganOutcome {
        index,
        seed,
        trace,
        training,
        histogram,
        metrics,
    })
}

/// Per-run accuracy of supervised outcomes.
pub fn supervised_accuracies(runs: &[SeedOutcome]) -> Vec<Accuracy> {
    runs.iter()
        .filter_map(|r| match r {
            SeedOutcome::Supervised(o) => Some(accuracy(&o.predictions)),
            SeedOutcome::Qgan(_) => None,
        })
        .collect()
}
