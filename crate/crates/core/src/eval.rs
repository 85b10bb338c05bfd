//! Post-training analysis of generator outputs and seed ensembles.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{sorted_spectrum, IsingInstance};
use crate::error::{check_len, Error, Result};
use crate::num::Real;
use crate::statevec::BitString;
use crate::train::{GeneratorModel, RunTrace};

const NORM_TOL: f64 = 1e-9;

/// Order of the bins of a [`DistributionHistogram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    BasisIndex,
    EnergySorted,
}

/// Probabilities over the `2^n` basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionHistogram {
    pub probs: Vec<f64>,
    pub ordering: Ordering,
    /// Basis index of each bin; only present for energy ordering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
}

impl DistributionHistogram {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(Error::InvalidCount(format!("{} bins is not a power of two", probs.len())));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidCount("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidCount(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            probs,
            ordering: Ordering::BasisIndex,
            indices: None,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Probability of `x`, whatever the bin order.
    pub fn prob_of(&self, x: &BitString) -> f64 {
        let i = x.index();
        match &self.indices {
            Some(idx) => idx.iter().position(|&j| j == i).map_or(0.0, |k| self.probs[k]),
            None => self.probs.get(i).copied().unwrap_or(0.0),
        }
    }

    /// Basis-ordered probabilities.
    pub fn basis_probs(&self) -> Vec<f64> {
        match &self.indices {
            None => self.probs.clone(),
            Some(idx) => {
                let mut out = vec![0.0; self.probs.len()];
                for (&i, &p) in idx.iter().zip(&self.probs) {
                    out[i] = p;
                }
                out
            }
        }
    }

    /// Bins reordered by increasing energy (ties by basis index).
    pub fn energy_sorted(&self, instance: &IsingInstance) -> Result<Self> {
        check_len("histogram bits", instance.n_spins(), self.n_bits())?;
        let basis = self.basis_probs();
        let order: Vec<usize> = sorted_spectrum(instance)?.iter().map(|(b, _)| b.index()).collect();
        Ok(Self {
            probs: order.iter().map(|&i| basis[i]).collect(),
            ordering: Ordering::EnergySorted,
            indices: Some(order),
        })
    }
}

/// Noise-averaged exact output distribution of `generator`.
pub fn generator_distribution<T: Real>(
    generator: &GeneratorModel<T>,
    noise_samples: &[Vec<T>],
) -> Result<DistributionHistogram> {
    if noise_samples.is_empty() {
        return Err(Error::Empty("noise samples"));
    }
    let mut acc = vec![0.0; 1 << generator.n_qubits()];
    for z in noise_samples {
        let state = generator.state(z)?;
        for (a, p) in acc.iter_mut().zip(state.probabilities()) {
            *a += p.to_f64_lossy();
        }
    }
    let w = 1.0 / noise_samples.len() as f64;
    acc.iter_mut().for_each(|a| *a *= w);
    // absorb rounding so the histogram is normalized to machine precision
    let total: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|a| *a /= total);
    DistributionHistogram::from_probs(acc)
}

/// `shots_per_noise` measurements from each noise instance, pooled.
pub fn sample_generator<T: Real, R: Rng + ?Sized>(
    generator: &GeneratorModel<T>,
    noise_samples: &[Vec<T>],
    shots_per_noise: usize,
    rng: &mut R,
) -> Result<Vec<BitString>> {
    if noise_samples.is_empty() {
        return Err(Error::Empty("noise samples"));
    }
    let mut out = Vec::with_capacity(noise_samples.len() * shots_per_noise);
    for z in noise_samples {
        out.extend(generator.state(z)?.sample_bitstrings(shots_per_noise, rng));
    }
    Ok(out)
}

/// Half the L1 distance.
pub fn total_variation_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_len("distribution", p.len(), q.len())?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Uniform distribution over `support` on `n` bits.
pub fn uniform_over(support: &[BitString], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; 1 << n];
    let w = 1.0 / support.len() as f64;
    for x in support {
        p[x.index()] += w;
    }
    p
}

/// What [`energy_statistics`] averages over.
#[derive(Debug, Clone, Copy)]
pub enum EnergySource<'a> {
    Histogram(&'a DistributionHistogram),
    Samples(&'a [BitString]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub mean: f64,
    /// Retained bins (histogram) or shots (samples).
    pub count: usize,
}

/// Mean energy over the states not in `exclude`, renormalized.
pub fn energy_statistics(
    source: EnergySource<'_>,
    instance: &IsingInstance,
    exclude: &[BitString],
) -> Result<EnergyStats> {
    let skip: HashSet<usize> = exclude.iter().map(BitString::index).collect();
    let (mut weight, mut acc, mut count) = (0.0, 0.0, 0usize);
    match source {
        EnergySource::Histogram(h) => {
            check_len("histogram bits", instance.n_spins(), h.n_bits())?;
            for (i, p) in h.basis_probs().into_iter().enumerate() {
                if skip.contains(&i) {
                    continue;
                }
                count += 1;
                if p > 0.0 {
                    weight += p;
                    acc += p * instance.energy(&BitString::from_index(i, h.n_bits()))?;
                }
            }
        }
        EnergySource::Samples(s) => {
            for x in s.iter().filter(|x| !skip.contains(&x.index())) {
                count += 1;
                weight += 1.0;
                acc += instance.energy(x)?;
            }
        }
    }
    if weight <= 0.0 {
        return Err(Error::Empty("probability mass after exclusion"));
    }
    Ok(EnergyStats {
        mean: acc / weight,
        count,
    })
}

/// Smallest and largest probability assigned to a training state.
pub fn mode_collapse_metric(hist: &DistributionHistogram, training: &[BitString]) -> Result<(f64, f64)> {
    if training.is_empty() {
        return Err(Error::Empty("training set"));
    }
    Ok(training
        .iter()
        .map(|x| hist.prob_of(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p))))
}

/// Pointwise mean and population standard deviation (or variance) of a
/// set of equally long series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_runs: usize,
    pub loss_d_mean: Vec<f64>,
    pub loss_d_std: Vec<f64>,
    pub loss_g_mean: Vec<f64>,
    pub loss_g_std: Vec<f64>,
    pub hist_mean: Vec<f64>,
    pub hist_var: Vec<f64>,
}

fn moments<'a>(rows: impl Iterator<Item = &'a [f64]> + Clone, len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.clone().count() as f64;
    let mut mean = vec![0.0; len];
    for r in rows.clone() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
    }
    let mut var = vec![0.0; len];
    for r in rows {
        var.iter_mut()
            .zip(r.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
    }
    (mean, var)
}

/// Seed-ensemble statistics: loss curves and histograms.
///
/// Runs are sorted by seed first, so the result does not depend on the
/// order they are passed in.
pub fn aggregate_runs(traces: &[RunTrace]) -> Result<Aggregate> {
    let first = traces.first().ok_or(Error::Empty("run traces"))?;
    for t in traces {
        check_len("loss trace", first.len(), t.len())?;
        check_len("histogram", first.distribution.len(), t.distribution.len())?;
    }
    let mut sorted: Vec<&RunTrace> = traces.iter().collect();
    sorted.sort_by(|a, b| a.seed.cmp(&b.seed).then_with(|| a.loss_g.partial_cmp(&b.loss_g).unwrap_or(std::cmp::Ordering::Equal)));
    let sqrt = |v: Vec<f64>| v.into_iter().map(f64::sqrt).collect::<Vec<_>>();
    let (loss_d_mean, vd) = moments(sorted.iter().map(|t| t.loss_d.as_slice()), first.len());
    let (loss_g_mean, vg) = moments(sorted.iter().map(|t| t.loss_g.as_slice()), first.len());
    let (hist_mean, hist_var) = moments(sorted.iter().map(|t| t.distribution.as_slice()), first.distribution.len());
    Ok(Aggregate {
        n_runs: traces.len(),
        loss_d_mean,
        loss_d_std: sqrt(vd),
        loss_g_mean,
        loss_g_std: sqrt(vg),
        hist_mean,
        hist_var,
    })
}
