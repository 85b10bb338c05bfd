//! Ordered gate lists with trainable and noise angle slots.

use serde::{Deserialize, Serialize};

use super::kernels::{self, Matrix2};
use super::{Axis, Result, SimError, StateVector};
use crate::num::Real;

/// Where a rotation angle comes from at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle<T> {
    /// Trainable parameter slot.
    Param(usize),
    /// Noise slot, supplied per evaluation and never differentiated.
    Noise(usize),
    Fixed(T),
}

impl<T: Real> Angle<T> {
    #[inline]
    pub fn resolve(self, params: &[T], noise: &[T]) -> T {
        match self {
            Angle::Param(i) => params[i],
            Angle::Noise(i) => noise[i],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate<T> {
    Rotation {
        axis: Axis,
        qubit: usize,
        angle: Angle<T>,
    },
    /// Rotation of `target` conditioned on `control` being `|1>`.
    ControlledRotation {
        axis: Axis,
        control: usize,
        target: usize,
        angle: Angle<T>,
    },
    Cz {
        a: usize,
        b: usize,
    },
}

impl<T: Real> Gate<T> {
    pub fn angle(&self) -> Option<Angle<T>> {
        match self {
            Gate::Rotation { angle, .. } | Gate::ControlledRotation { angle, .. } => Some(*angle),
            Gate::Cz { .. } => None,
        }
    }

    pub(crate) fn apply_to(&self, state: &mut StateVector<T>, theta: T) {
        match *self {
            Gate::Rotation { axis, qubit, .. } => {
                let stride = state.stride(qubit);
                kernels::apply_matrix(state.amplitudes_mut(), stride, &axis.rotation(theta));
            }
            Gate::ControlledRotation {
                axis,
                control,
                target,
                ..
            } => {
                let (c, t) = (state.stride(control), state.stride(target));
                kernels::apply_controlled_matrix(
                    state.amplitudes_mut(),
                    c,
                    t,
                    &axis.rotation(theta),
                );
            }
            Gate::Cz { a, b } => {
                let (a, b) = (state.stride(a), state.stride(b));
                kernels::apply_cz(state.amplitudes_mut(), a, b);
            }
        }
    }
}

/// A gate list over a fixed register width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit<T> {
    n_qubits: usize,
    gates: Vec<Gate<T>>,
    n_params: usize,
    n_noise: usize,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(SimError::NoQubits);
        }
        if n_qubits > super::MAX_QUBITS {
            return Err(SimError::TooManyQubits {
                requested: n_qubits,
                max: super::MAX_QUBITS,
            });
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
            n_params: 0,
            n_noise: 0,
        })
    }

    /// Reserves slot counts even if no gate refers to them yet.
    pub fn with_slots(mut self, n_params: usize, n_noise: usize) -> Self {
        self.n_params = self.n_params.max(n_params);
        self.n_noise = self.n_noise.max(n_noise);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_noise(&self) -> usize {
        self.n_noise
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit == 0 || qubit > self.n_qubits {
            Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn track(&mut self, angle: Angle<T>) {
        match angle {
            Angle::Param(i) => self.n_params = self.n_params.max(i + 1),
            Angle::Noise(i) => self.n_noise = self.n_noise.max(i + 1),
            Angle::Fixed(_) => {}
        }
    }

    pub fn push_rotation(&mut self, axis: Axis, qubit: usize, angle: Angle<T>) -> Result<()> {
        self.check_qubit(qubit)?;
        self.track(angle);
        self.gates.push(Gate::Rotation { axis, qubit, angle });
        Ok(())
    }

    pub fn push_controlled_rotation(
        &mut self,
        axis: Axis,
        control: usize,
        target: usize,
        angle: Angle<T>,
    ) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::RepeatedQubit(control));
        }
        self.track(angle);
        self.gates.push(Gate::ControlledRotation {
            axis,
            control,
            target,
            angle,
        });
        Ok(())
    }

    pub fn push_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(SimError::RepeatedQubit(a));
        }
        self.gates.push(Gate::Cz { a, b });
        Ok(())
    }

    pub(crate) fn check_inputs(
        &self,
        state: &StateVector<T>,
        params: &[T],
        noise: &[T],
    ) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                left: state.n_qubits(),
                right: self.n_qubits,
            });
        }
        if params.len() != self.n_params {
            return Err(SimError::SlotCount {
                what: "parameters",
                expected: self.n_params,
                got: params.len(),
            });
        }
        if noise.len() < self.n_noise {
            return Err(SimError::SlotCount {
                what: "noise values",
                expected: self.n_noise,
                got: noise.len(),
            });
        }
        Ok(())
    }

    /// Runs the circuit on `state` in place.
    ///
    /// Runs of single-qubit rotations on the same qubit are fused into one
    /// 2x2 matrix before touching the amplitudes.
    pub fn apply(&self, state: &mut StateVector<T>, params: &[T], noise: &[T]) -> Result<()> {
        self.check_inputs(state, params, noise)?;
        self.apply_unchecked(state, params, noise, None);
        Ok(())
    }

    /// Same as [`Self::apply`] with gate `shift.0`'s angle offset by `shift.1`.
    pub(crate) fn apply_unchecked(
        &self,
        state: &mut StateVector<T>,
        params: &[T],
        noise: &[T],
        shift: Option<(usize, T)>,
    ) {
        let mut pending: Option<(usize, Matrix2<T>)> = None;
        let mut cz_masks: Vec<usize> = Vec::new();
        let flush = |state: &mut StateVector<T>, pending: &mut Option<(usize, Matrix2<T>)>| {
            if let Some((qubit, m)) = pending.take() {
                let stride = state.stride(qubit);
                kernels::apply_matrix(state.amplitudes_mut(), stride, &m);
            }
        };
        let flush_cz = |state: &mut StateVector<T>, masks: &mut Vec<usize>| {
            if !masks.is_empty() {
                kernels::apply_cz_layer(state.amplitudes_mut(), masks);
                masks.clear();
            }
        };
        for (idx, gate) in self.gates.iter().enumerate() {
            let mut theta = gate
                .angle()
                .map(|a| a.resolve(params, noise))
                .unwrap_or_else(T::zero);
            if let Some((at, delta)) = shift {
                if at == idx {
                    theta += delta;
                }
            }
            match *gate {
                Gate::Cz { a, b } => {
                    flush(state, &mut pending);
                    cz_masks.push(state.stride(a) | state.stride(b));
                }
                Gate::Rotation { axis, qubit, .. } => {
                    flush_cz(state, &mut cz_masks);
                    let m = axis.rotation(theta);
                    pending = match pending.take() {
                        Some((q, acc)) if q == qubit => Some((q, kernels::mat_mul(&m, &acc))),
                        other => {
                            let mut other = other;
                            flush(state, &mut other);
                            Some((qubit, m))
                        }
                    };
                }
                Gate::ControlledRotation { .. } => {
                    flush(state, &mut pending);
                    flush_cz(state, &mut cz_masks);
                    gate.apply_to(state, theta);
                }
            }
        }
        flush(state, &mut pending);
        flush_cz(state, &mut cz_masks);
    }

    /// Output state for `input`.
    pub fn run(&self, input: &StateVector<T>, params: &[T], noise: &[T]) -> Result<StateVector<T>> {
        let mut state = input.clone();
        self.apply(&mut state, params, noise)?;
        Ok(state)
    }

    /// The unitary as a dense matrix, column `j` being the image of `|j>`.
    /// Intended for tests at small widths.
    pub fn unitary(&self, params: &[T], noise: &[T]) -> Result<Vec<Vec<num_complex::Complex<T>>>> {
        let dim = 1usize << self.n_qubits;
        (0..dim)
            .map(|j| {
                let input = StateVector::basis_state(j, self.n_qubits)?;
                Ok(self.run(&input, params, noise)?.into_amplitudes())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn slot_tracking() {
        let mut c = Circuit::<f64>::new(2).unwrap();
        c.push_rotation(Axis::X, 1, Angle::Param(2)).unwrap();
        c.push_rotation(Axis::Y, 2, Angle::Noise(1)).unwrap();
        c.push_cz(1, 2).unwrap();
        assert_eq!((c.n_params(), c.n_noise()), (3, 2));
        assert!(c.push_cz(1, 1).is_err());
        assert!(c.push_rotation(Axis::X, 3, Angle::Fixed(0.0)).is_err());
        let s = StateVector::zero_state(2).unwrap();
        assert!(matches!(
            c.run(&s, &[0.0; 2], &[0.0; 2]),
            Err(SimError::SlotCount { .. })
        ));
    }

    #[test]
    fn fused_matches_gate_by_gate() {
        let mut c = Circuit::<f64>::new(3).unwrap();
        let mut k = 0;
        for q in 1..=3 {
            for axis in [Axis::Z, Axis::Y, Axis::Z, Axis::X] {
                c.push_rotation(axis, q, Angle::Param(k)).unwrap();
                k += 1;
            }
        }
        c.push_cz(1, 3).unwrap();
        c.push_controlled_rotation(Axis::Y, 3, 1, Angle::Fixed(0.4)).unwrap();
        let params: Vec<f64> = (0..k).map(|i| 0.3 + 0.17 * i as f64).collect();
        let input = StateVector::basis_state(5, 3).unwrap();
        let fused = c.run(&input, &params, &[]).unwrap();

        let mut slow = input.clone();
        for gate in c.gates() {
            match *gate {
                Gate::Rotation { axis, qubit, angle } => slow
                    .apply_rotation(axis, qubit, angle.resolve(&params, &[]))
                    .unwrap(),
                Gate::Cz { a, b } => slow.apply_cz(a, b).unwrap(),
                Gate::ControlledRotation { .. } => gate.apply_to(&mut slow, 0.4),
            }
        }
        for (a, b) in fused.amplitudes().iter().zip(slow.amplitudes()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-13);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-13);
        }
    }
}
