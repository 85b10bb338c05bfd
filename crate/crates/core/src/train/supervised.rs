use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use crate::circuits::DiscriminatorSpec;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::statevec::BitString;

/// Mean squared error between predicted and target labels.
pub fn supervised_loss<T: Real>(disc: &DiscriminatorSpec<T>, dataset: &LabeledDataset) -> Result<T> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut acc = T::zero();
    for item in &dataset.items {
        let d = disc.predict(&item.bits)? - T::of(item.label as f64);
        acc += d * d;
    }
    Ok(acc / T::of(dataset.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisedConfig {
    pub steps: usize,
    #[serde(default)]
    pub adam: AdamConfig,
    /// Minibatch size; the whole dataset when absent.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// End early once every item is classified correctly.
    #[serde(default)]
    pub stop_when_perfect: bool,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            adam: AdamConfig::default(),
            batch_size: None,
            stop_when_perfect: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub bits: BitString,
    pub label: u8,
    pub y_pred: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

impl Prediction {
    /// Class at the 0.5 threshold.
    pub fn predicted_class(&self) -> u8 {
        u8::from(self.y_pred >= 0.5)
    }

    pub fn correct(&self) -> bool {
        self.predicted_class() == self.label
    }
}

/// Accuracy at the 0.5 threshold, overall and per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub overall: f64,
    pub class0: f64,
    pub class1: f64,
    pub balanced: f64,
}

pub fn accuracy(predictions: &[Prediction]) -> Accuracy {
    let rate = |label: Option<u8>| {
        let pool: Vec<_> = predictions
            .iter()
            .filter(|p| label.is_none_or(|l| p.label == l))
            .collect();
        if pool.is_empty() {
            return f64::NAN;
        }
        pool.iter().filter(|p| p.correct()).count() as f64 / pool.len() as f64
    };
    let (class0, class1) = (rate(Some(0)), rate(Some(1)));
    let balanced = match (class0.is_nan(), class1.is_nan()) {
        (false, false) => 0.5 * (class0 + class1),
        (true, _) => class1,
        (_, true) => class0,
    };
    Accuracy {
        overall: rate(None),
        class0,
        class1,
        balanced,
    }
}

pub fn predict_all<T: Real>(disc: &DiscriminatorSpec<T>, dataset: &LabeledDataset) -> Result<Vec<Prediction>> {
    dataset
        .items
        .iter()
        .map(|item| {
            Ok(Prediction {
                bits: item.bits.clone(),
                label: item.label,
                y_pred: disc.predict(&item.bits)?.to_f64_lossy(),
                energy: item.energy,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SupervisedReport<T: Real> {
    pub disc: DiscriminatorSpec<T>,
    /// Batch loss before each step.
    pub losses: Vec<f64>,
    pub steps_run: usize,
    pub predictions: Vec<Prediction>,
    pub accuracy: Accuracy,
}

/// Loss over `indices` and its gradient; also the per-item predictions.
fn loss_and_gradient<T: Real>(
    disc: &DiscriminatorSpec<T>,
    dataset: &LabeledDataset,
    indices: &[usize],
) -> Result<(T, Vec<T>, Vec<T>)> {
    let mut grad = vec![T::zero(); disc.params().len()];
    let mut loss = T::zero();
    let mut preds = Vec::with_capacity(indices.len());
    let scale = T::one() / T::of(indices.len() as f64);
    for &i in indices {
        let item = &dataset.items[i];
        let (y, g) = disc.label_and_gradient(&disc.encode(&item.bits)?)?;
        let residual = y - T::of(item.label as f64);
        loss += residual * residual * scale;
        let w = T::two() * residual * scale;
        grad.iter_mut().zip(&g).for_each(|(a, &b)| *a += w * b);
        preds.push(y);
    }
    Ok((loss, grad, preds))
}

/// Trains `disc` with ADAM on the mean squared label error.
///
/// The seed only drives minibatch selection; the initial parameters are
/// whatever `disc` carries.
pub fn train_discriminator_supervised<T: Real>(
    mut disc: DiscriminatorSpec<T>,
    dataset: &LabeledDataset,
    config: &SupervisedConfig,
    seed: u64,
) -> Result<SupervisedReport<T>> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if config.steps == 0 {
        return Err(Error::InvalidCount("supervised training needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adam = AdamState::new(disc.params().len(), config.adam);
    let all: Vec<usize> = (0..dataset.len()).collect();
    let mut losses = Vec::with_capacity(config.steps);
    let mut steps_run = 0;
    for _ in 0..config.steps {
        let batch = match config.batch_size {
            Some(b) if b < dataset.len() => sample(&mut rng, dataset.len(), b).into_vec(),
            _ => all.clone(),
        };
        let (loss, grad, preds) = loss_and_gradient(&disc, dataset, &batch)?;
        losses.push(loss.to_f64_lossy());
        if config.stop_when_perfect && batch.len() == dataset.len() {
            let perfect = batch.iter().zip(&preds).all(|(&i, &y)| {
                u8::from(y >= T::half()) == dataset.items[i].label
            });
            if perfect {
                break;
            }
        }
        adam.step(disc.params_mut(), &grad)?;
        steps_run += 1;
    }
    let predictions = predict_all(&disc, dataset)?;
    let accuracy = accuracy(&predictions);
    Ok(SupervisedReport {
        disc,
        losses,
        steps_run,
        predictions,
        accuracy,
    })
}
