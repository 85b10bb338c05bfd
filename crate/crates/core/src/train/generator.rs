use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{DiscriminatorSpec, GeneratorSpec};
use crate::error::Result;
use crate::neural::{AmplitudeModel, MlpModel, MLP_INPUT};
use crate::num::Real;
use crate::statevec::StateVector;

/// Noise source feeding a generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    /// Independent uniform angles on `[0, range)`.
    Angle(f64),
    /// Independent uniform values on `[-1, 1]`.
    Symmetric,
    /// No noise at all.
    None,
}

impl NoiseDistribution {
    pub fn draw<T: Real, R: Rng + ?Sized>(self, dim: usize, rng: &mut R) -> Vec<T> {
        match self {
            NoiseDistribution::Angle(range) => (0..dim).map(|_| T::of(rng.gen_range(0.0..range))).collect(),
            NoiseDistribution::Symmetric => {
                (0..dim).map(|_| T::of(rng.gen_range(-1.0..=1.0))).collect()
            }
            NoiseDistribution::None => Vec::new(),
        }
    }
}

/// `count` noise vectors of length `dim`, uniform on `[0, 2 pi)`.
pub fn sample_noise<T: Real, R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<T>> {
    (0..count)
        .map(|_| NoiseDistribution::Angle(TAU).draw(dim, rng))
        .collect()
}

/// Any of the four generator families.
#[derive(Debug, Clone)]
pub enum GeneratorModel<T: Real> {
    /// Parameterized circuit; covers both the reuploading and the
    /// linear-noise variants through its noise mode.
    Circuit(GeneratorSpec<T>),
    Amplitude(AmplitudeModel<T>),
    Mlp(MlpModel<T>),
}

impl<T: Real> GeneratorModel<T> {
    pub fn n_qubits(&self) -> usize {
        match self {
            GeneratorModel::Circuit(g) => g.n_qubits(),
            GeneratorModel::Amplitude(m) => m.n_qubits(),
            GeneratorModel::Mlp(m) => m.n_qubits(),
        }
    }

    pub fn noise_distribution(&self) -> NoiseDistribution {
        match self {
            GeneratorModel::Circuit(g) => NoiseDistribution::Angle(g.noise_range()),
            GeneratorModel::Amplitude(_) => NoiseDistribution::None,
            GeneratorModel::Mlp(_) => NoiseDistribution::Symmetric,
        }
    }

    pub fn noise_dim(&self) -> usize {
        match self {
            GeneratorModel::Circuit(g) => g.n_qubits(),
            GeneratorModel::Amplitude(_) => 0,
            GeneratorModel::Mlp(_) => MLP_INPUT,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise_distribution() == NoiseDistribution::None
    }

    /// `count` noise draws; a noiseless model always gets one empty draw
    /// since every draw would produce the same state.
    pub fn sample_noise<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<T>> {
        if self.is_noiseless() {
            return vec![Vec::new()];
        }
        let dist = self.noise_distribution();
        (0..count).map(|_| dist.draw(self.noise_dim(), rng)).collect()
    }

    pub fn state(&self, z: &[T]) -> Result<StateVector<T>> {
        match self {
            GeneratorModel::Circuit(g) => g.state(z),
            GeneratorModel::Amplitude(m) => m.state(),
            GeneratorModel::Mlp(m) => m.state(z),
        }
    }

    pub fn params(&self) -> &[T] {
        match self {
            GeneratorModel::Circuit(g) => g.params(),
            GeneratorModel::Amplitude(m) => &m.c,
            GeneratorModel::Mlp(m) => m.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        match self {
            GeneratorModel::Circuit(g) => g.params_mut(),
            GeneratorModel::Amplitude(m) => &mut m.c,
            GeneratorModel::Mlp(m) => m.params_mut(),
        }
    }

    /// `y_fake(z)` and its gradient with respect to the generator parameters.
    pub fn fake_label_gradient(&self, disc: &DiscriminatorSpec<T>, z: &[T]) -> Result<(T, Vec<T>)> {
        match self {
            GeneratorModel::Circuit(g) => g.fake_label_gradient(disc, z),
            GeneratorModel::Amplitude(m) => m.fake_label_gradient(disc),
            GeneratorModel::Mlp(m) => m.fake_label_gradient(disc, z),
        }
    }
}
