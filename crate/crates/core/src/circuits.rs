//! Discriminator and generator ansatze.
//!
//! Both are built from the same hardware-efficient layer: on every qubit
//! `R_z(gamma) R_y(beta) R_z(alpha)` (alpha applied first), then CZ gates
//! along the configured entangler pattern. Parameters are laid out layer by
//! layer, qubit by qubit, as `(alpha, beta, gamma)`.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{check_len, Error, Result};
use crate::num::Real;
use crate::statevec::{Angle, Axis, BitString, Circuit, StateVector};

/// Which CZ gates close each layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entangler {
    /// Open chain `(i, i+1)`, `i = 1..n-1`.
    #[default]
    Chain,
    /// Chain plus the closing `(n, 1)` gate when `n > 2`.
    Ring,
    None,
}

impl Entangler {
    fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        let mut pairs: Vec<_> = match self {
            Entangler::None => return Vec::new(),
            _ => (1..n).map(|q| (q, q + 1)).collect(),
        };
        if self == Entangler::Ring && n > 2 {
            pairs.push((n, 1));
        }
        pairs
    }
}

pub const PARAMS_PER_QUBIT: usize = 3;

/// Appends one trainable layer whose slots start at `first_slot`.
fn push_layer<T: Real>(
    circuit: &mut Circuit<T>,
    n: usize,
    entangler: Entangler,
    first_slot: usize,
) -> Result<()> {
    for q in 1..=n {
        let base = first_slot + (q - 1) * PARAMS_PER_QUBIT;
        circuit.push_rotation(Axis::Z, q, Angle::Param(base))?;
        circuit.push_rotation(Axis::Y, q, Angle::Param(base + 1))?;
        circuit.push_rotation(Axis::Z, q, Angle::Param(base + 2))?;
    }
    for (a, b) in entangler.pairs(n) {
        circuit.push_cz(a, b)?;
    }
    Ok(())
}

fn push_noise_layer<T: Real>(circuit: &mut Circuit<T>, n: usize, axis: Axis) -> Result<()> {
    for q in 1..=n {
        circuit.push_rotation(axis, q, Angle::Noise(q - 1))?;
    }
    Ok(())
}

/// Independent uniform angles on `[0, 2 pi)`.
pub fn random_angles<T: Real, R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<T> {
    (0..count).map(|_| T::of(rng.gen_range(0.0..TAU))).collect()
}

/// `y = (<Z_1> + 1) / 2`.
#[inline]
pub fn label_from_expectation<T: Real>(z: T) -> T {
    T::half() * (z + T::one())
}

/// Quantum discriminator `U_D(theta_D)` on `n_data + n_aux` qubits, read out
/// on qubit 1.
#[derive(Debug, Clone)]
pub struct DiscriminatorSpec<T: Real> {
    n_data: usize,
    n_aux: usize,
    depth: usize,
    entangler: Entangler,
    params: Vec<T>,
    circuit: Circuit<T>,
}

impl<T: Real> DiscriminatorSpec<T> {
    pub fn new(n_data: usize, n_aux: usize, depth: usize, params: Vec<T>) -> Result<Self> {
        Self::with_entangler(n_data, n_aux, depth, Entangler::Chain, params)
    }

    pub fn with_entangler(
        n_data: usize,
        n_aux: usize,
        depth: usize,
        entangler: Entangler,
        params: Vec<T>,
    ) -> Result<Self> {
        if n_data == 0 {
            return Err(Error::InvalidCount("discriminator needs data qubits".into()));
        }
        let n = n_data + n_aux;
        let per_layer = n * PARAMS_PER_QUBIT;
        check_len("discriminator parameters", depth * per_layer, params.len())?;
        let mut circuit = Circuit::new(n)?.with_slots(depth * per_layer, 0);
        for layer in 0..depth {
            push_layer(&mut circuit, n, entangler, layer * per_layer)?;
        }
        Ok(Self {
            n_data,
            n_aux,
            depth,
            entangler,
            params,
            circuit,
        })
    }

    /// Parameters drawn uniformly from `[0, 2 pi)`.
    pub fn random<R: Rng + ?Sized>(
        n_data: usize,
        n_aux: usize,
        depth: usize,
        entangler: Entangler,
        rng: &mut R,
    ) -> Result<Self> {
        let count = depth * (n_data + n_aux) * PARAMS_PER_QUBIT;
        Self::with_entangler(n_data, n_aux, depth, entangler, random_angles(count, rng))
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn n_aux(&self) -> usize {
        self.n_aux
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data + self.n_aux
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn circuit(&self) -> &Circuit<T> {
        &self.circuit
    }

    /// Encoded input `|x> (x) |0>^n_aux`.
    pub fn encode(&self, x: &BitString) -> Result<StateVector<T>> {
        check_len("discriminator input bits", self.n_data, x.len())?;
        Ok(StateVector::basis_encode(x, self.n_qubits())?)
    }

    /// Data-register state with the auxiliary qubits appended in `|0>`.
    pub fn pad(&self, data_state: &StateVector<T>) -> Result<StateVector<T>> {
        check_len("generator qubits", self.n_data, data_state.n_qubits())?;
        Ok(data_state.with_trailing_zeros(self.n_aux)?)
    }

    /// Label of an input already living on all discriminator qubits.
    pub fn label_of(&self, input: &StateVector<T>) -> Result<T> {
        let out = self.circuit.run(input, &self.params, &[])?;
        Ok(label_from_expectation(out.expectation_z(1)?))
    }

    /// `y_real(x)`.
    pub fn predict(&self, x: &BitString) -> Result<T> {
        self.label_of(&self.encode(x)?)
    }

    /// `y_fake` for a generator output on the data qubits; the pipeline is
    /// coherent, nothing is measured before the discriminator.
    pub fn fake_label(&self, gen_output: &StateVector<T>) -> Result<T> {
        self.label_of(&self.pad(gen_output)?)
    }

    /// Mean `y_real` over a batch.
    pub fn batch_real_label(&self, batch: &[BitString]) -> Result<T> {
        if batch.is_empty() {
            return Err(Error::Empty("real batch"));
        }
        let mut acc = T::zero();
        for x in batch {
            acc += self.predict(x)?;
        }
        Ok(acc / T::of(batch.len() as f64))
    }

    /// `d y / d theta_D` for an input on all discriminator qubits.
    pub fn label_gradient(&self, input: &StateVector<T>) -> Result<Vec<T>> {
        let mut g = diff::adjoint_gradient(&self.circuit, &self.params, &[], input, 1)?;
        g.iter_mut().for_each(|v| *v *= T::half());
        Ok(g)
    }

    /// Label together with its gradient, sharing the forward pass.
    pub fn label_and_gradient(&self, input: &StateVector<T>) -> Result<(T, Vec<T>)> {
        let out = self.circuit.run(input, &self.params, &[])?;
        let label = label_from_expectation(out.expectation_z(1)?);
        let mut costate = out.clone();
        costate.apply_z(1)?;
        let mut g = diff::adjoint_vjp(&self.circuit, &self.params, &[], out, costate)?;
        g.iter_mut().for_each(|v| *v *= T::half());
        Ok((label, g))
    }

    /// `y_fake` and the vector `chi` with `d y_fake = Re <chi | d psi>` for
    /// perturbations `d psi` of the generator state.
    ///
    /// `chi` is `P_0 U_D^dag Z_1 U_D (psi (x) |0>)` restricted to the data
    /// register, `P_0` projecting the auxiliary qubits on `|0>`.
    pub fn fake_label_costate(&self, gen_output: &StateVector<T>) -> Result<(T, StateVector<T>)> {
        let mut state = self.pad(gen_output)?;
        self.circuit.apply(&mut state, &self.params, &[])?;
        let label = label_from_expectation(state.expectation_z(1)?);
        state.apply_z(1)?;
        undo_circuit(&self.circuit, &self.params, &mut state);
        Ok((label, state.project_trailing_zeros(self.n_aux)?))
    }
}

/// Applies the inverse of `circuit` gate by gate.
fn undo_circuit<T: Real>(circuit: &Circuit<T>, params: &[T], state: &mut StateVector<T>) {
    for gate in circuit.gates().iter().rev() {
        let theta = gate
            .angle()
            .map(|a| a.resolve(params, &[]))
            .unwrap_or_else(T::zero);
        gate.apply_to(state, -theta);
    }
}

/// How classical noise enters the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// A noise layer before every trainable layer.
    Reupload,
    /// One noise layer on the input, then the trainable layers.
    Linear,
}

impl NoiseMode {
    pub fn default_axis(self) -> Axis {
        match self {
            NoiseMode::Reupload => Axis::X,
            NoiseMode::Linear => Axis::Y,
        }
    }
}

/// Quantum generator `U_G(theta_G, z)` acting on `|0...0>`.
#[derive(Debug, Clone)]
pub struct GeneratorSpec<T: Real> {
    n_qubits: usize,
    depth: usize,
    noise_mode: NoiseMode,
    noise_axis: Axis,
    entangler: Entangler,
    noise_range: f64,
    params: Vec<T>,
    circuit: Circuit<T>,
}

impl<T: Real> GeneratorSpec<T> {
    pub fn new(n_qubits: usize, depth: usize, noise_mode: NoiseMode, params: Vec<T>) -> Result<Self> {
        Self::with_options(
            n_qubits,
            depth,
            noise_mode,
            noise_mode.default_axis(),
            Entangler::Chain,
            params,
        )
    }

    pub fn with_options(
        n_qubits: usize,
        depth: usize,
        noise_mode: NoiseMode,
        noise_axis: Axis,
        entangler: Entangler,
        params: Vec<T>,
    ) -> Result<Self> {
        let per_layer = n_qubits * PARAMS_PER_QUBIT;
        check_len("generator parameters", depth * per_layer, params.len())?;
        let mut circuit = Circuit::new(n_qubits)?.with_slots(depth * per_layer, n_qubits);
        if noise_mode == NoiseMode::Linear {
            push_noise_layer(&mut circuit, n_qubits, noise_axis)?;
        }
        for layer in 0..depth {
            if noise_mode == NoiseMode::Reupload {
                push_noise_layer(&mut circuit, n_qubits, noise_axis)?;
            }
            push_layer(&mut circuit, n_qubits, entangler, layer * per_layer)?;
        }
        Ok(Self {
            n_qubits,
            depth,
            noise_mode,
            noise_axis,
            entangler,
            noise_range: TAU,
            params,
            circuit,
        })
    }

    /// Draw noise angles from `[0, range)` instead of `[0, 2 pi)`.
    pub fn with_noise_range(mut self, range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::Config(format!("noise range must be positive, got {range}")));
        }
        self.noise_range = range;
        Ok(self)
    }

    pub fn random<R: Rng + ?Sized>(
        n_qubits: usize,
        depth: usize,
        noise_mode: NoiseMode,
        noise_axis: Axis,
        entangler: Entangler,
        rng: &mut R,
    ) -> Result<Self> {
        let count = depth * n_qubits * PARAMS_PER_QUBIT;
        Self::with_options(
            n_qubits,
            depth,
            noise_mode,
            noise_axis,
            entangler,
            random_angles(count, rng),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn noise_mode(&self) -> NoiseMode {
        self.noise_mode
    }

    pub fn noise_axis(&self) -> Axis {
        self.noise_axis
    }

    pub fn entangler(&self) -> Entangler {
        self.entangler
    }

    /// Upper end of the uniform noise interval.
    pub fn noise_range(&self) -> f64 {
        self.noise_range
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn circuit(&self) -> &Circuit<T> {
        &self.circuit
    }

    /// `|psi_G(z)> = U_G(theta_G, z) |0...0>`.
    pub fn state(&self, z: &[T]) -> Result<StateVector<T>> {
        check_len("noise vector", self.n_qubits, z.len())?;
        let mut state = StateVector::zero_state(self.n_qubits)?;
        self.circuit.apply(&mut state, &self.params, z)?;
        Ok(state)
    }

    /// `y_fake(z)` and its gradient with respect to `theta_G`.
    pub fn fake_label_gradient(
        &self,
        disc: &DiscriminatorSpec<T>,
        z: &[T],
    ) -> Result<(T, Vec<T>)> {
        let psi = self.state(z)?;
        let (label, mut chi) = disc.fake_label_costate(&psi)?;
        // adjoint_vjp returns 2 Re <chi|d psi>
        chi.scale(num_complex::Complex::new(T::half(), T::zero()));
        let grad = diff::adjoint_vjp(&self.circuit, &self.params, z, psi, chi)?;
        Ok((label, grad))
    }
}
