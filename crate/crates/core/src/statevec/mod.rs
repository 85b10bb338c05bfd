//! Dense statevector simulator.
//!
//! A [`StateVector`] stores all `2^n` complex amplitudes of an `n`-qubit
//! register and is updated in place. Qubits are addressed 1-based and qubit 1
//! is the most significant bit of the basis index, so the bitstring `0011`
//! is basis state 3. Rotations follow `R_a(phi) = exp(-i phi sigma_a / 2)`.

mod bits;
mod circuit;
pub(crate) mod kernels;

pub use bits::BitString;
pub use circuit::{Angle, Circuit, Gate};
pub use kernels::Matrix2;

use num_complex::Complex;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{requested} qubits requested, the simulator is capped at {max}")]
    TooManyQubits { requested: usize, max: usize },
    #[error("a register needs at least one qubit")]
    NoQubits,
    #[error("qubit {qubit} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),
    #[error("cannot encode {bits} bits into {total} qubits")]
    EncodingTooWide { bits: usize, total: usize },
    #[error("amplitude vector of length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("register sizes differ: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("expected {expected} {what}, got {got}")]
    SlotCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gate {0} is not supported by this gradient method")]
    UnsupportedGate(usize),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Rotation axis of a single-qubit Pauli rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Matrix of `R_axis(angle)`.
    pub fn rotation<T: Real>(self, angle: T) -> Matrix2<T> {
        let half = angle * T::half();
        let (s, c) = half.sin_cos();
        let z = T::zero();
        match self {
            Axis::X => [
                [Complex::new(c, z), Complex::new(z, -s)],
                [Complex::new(z, -s), Complex::new(c, z)],
            ],
            Axis::Y => [
                [Complex::new(c, z), Complex::new(-s, z)],
                [Complex::new(s, z), Complex::new(c, z)],
            ],
            Axis::Z => [
                [Complex::new(c, -s), Complex::new(z, z)],
                [Complex::new(z, z), Complex::new(c, s)],
            ],
        }
    }
}

/// `2^n` complex amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(SimError::NoQubits);
    }
    if n_qubits > MAX_QUBITS {
        return Err(SimError::TooManyQubits {
            requested: n_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(0, n_qubits)
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(index: usize, n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index % dim] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(SimError::NotPowerOfTwo(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_width(n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    /// Builds a normalized state from real amplitudes.
    pub fn from_real_normalized(values: &[T]) -> Result<Self> {
        let norm = values.iter().map(|&v| v * v).sum::<T>().sqrt();
        if !norm.is_finite() || norm <= T::zero() {
            return Err(SimError::ZeroNorm);
        }
        Self::from_amplitudes(
            values
                .iter()
                .map(|&v| Complex::new(v / norm, T::zero()))
                .collect(),
        )
    }

    /// Basis encoding `|b_1 ... b_N 0 ... 0>` built literally as
    /// `prod_i R_x(b_i pi)` on `|0...0>`; trailing qubits stay in `|0>`.
    ///
    /// The result carries the global phase `(-i)^(number of ones)`.
    pub fn basis_encode(bits: &BitString, total_qubits: usize) -> Result<Self> {
        if total_qubits < bits.len() {
            return Err(SimError::EncodingTooWide {
                bits: bits.len(),
                total: total_qubits,
            });
        }
        let mut state = Self::zero_state(total_qubits)?;
        let flip = Axis::X.rotation(T::PI());
        for (i, bit) in bits.iter().enumerate() {
            if bit {
                let stride = state.stride(i + 1);
                kernels::apply_matrix(&mut state.amps, stride, &flip);
            }
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    /// Bit weight of a 1-based qubit index. No range check.
    #[inline]
    pub(crate) fn stride(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - qubit)
    }

    pub(crate) fn checked_stride(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.n_qubits {
            Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(self.stride(qubit))
        }
    }

    pub fn apply_rotation(&mut self, axis: Axis, qubit: usize, angle: T) -> Result<()> {
        let stride = self.checked_stride(qubit)?;
        match axis {
            Axis::Z => {
                let (s, c) = (angle * T::half()).sin_cos();
                kernels::apply_diagonal(
                    &mut self.amps,
                    stride,
                    Complex::new(c, -s),
                    Complex::new(c, s),
                );
            }
            _ => kernels::apply_matrix(&mut self.amps, stride, &axis.rotation(angle)),
        }
        Ok(())
    }

    /// Applies an arbitrary 2x2 matrix to one qubit.
    pub fn apply_single(&mut self, qubit: usize, matrix: &Matrix2<T>) -> Result<()> {
        let stride = self.checked_stride(qubit)?;
        kernels::apply_matrix(&mut self.amps, stride, matrix);
        Ok(())
    }

    pub fn apply_cz(&mut self, qubit_a: usize, qubit_b: usize) -> Result<()> {
        let a = self.checked_stride(qubit_a)?;
        let b = self.checked_stride(qubit_b)?;
        if a == b {
            return Err(SimError::RepeatedQubit(qubit_a));
        }
        kernels::apply_cz(&mut self.amps, a, b);
        Ok(())
    }

    /// Applies `Z` to one qubit (a sign flip on its `|1>` half).
    pub fn apply_z(&mut self, qubit: usize) -> Result<()> {
        let stride = self.checked_stride(qubit)?;
        let one = Complex::new(T::one(), T::zero());
        kernels::apply_diagonal(&mut self.amps, stride, one, -one);
        Ok(())
    }

    /// `<Z>` on one qubit; `+1` weight where that qubit's bit is 0.
    pub fn expectation_z(&self, qubit: usize) -> Result<T> {
        let stride = self.checked_stride(qubit)?;
        let mut acc = T::zero();
        for chunk in self.amps.chunks_exact(2 * stride) {
            let (lo, hi) = chunk.split_at(stride);
            acc += lo.iter().map(|a| a.norm_sqr()).sum::<T>();
            acc -= hi.iter().map(|a| a.norm_sqr()).sum::<T>();
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_size(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            }))
    }

    pub(crate) fn same_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            Err(SimError::SizeMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `count` i.i.d. measurement outcomes in the computational basis.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<BitString> {
        let weights: Vec<f64> = self.amps.iter().map(|a| a.norm_sqr().to_f64_lossy()).collect();
        let dist = WeightedIndex::new(&weights).expect("state has positive norm");
        (0..count)
            .map(|_| BitString::from_index(dist.sample(rng), self.n_qubits))
            .collect()
    }

    /// `|self> (x) |0>^extra`, the extra qubits appended after the last one.
    pub fn with_trailing_zeros(&self, extra: usize) -> Result<Self> {
        if extra == 0 {
            return Ok(self.clone());
        }
        let mut out = Self::zero_state(self.n_qubits + extra)?;
        out.amps[0] = Complex::new(T::zero(), T::zero());
        for (i, a) in self.amps.iter().enumerate() {
            out.amps[i << extra] = *a;
        }
        Ok(out)
    }

    /// Components whose trailing `extra` qubits are all `|0>`, as a smaller
    /// (generally unnormalized) register. Adjoint of [`Self::with_trailing_zeros`].
    pub fn project_trailing_zeros(&self, extra: usize) -> Result<Self> {
        if extra == 0 {
            return Ok(self.clone());
        }
        if extra >= self.n_qubits {
            return Err(SimError::EncodingTooWide {
                bits: self.n_qubits,
                total: extra,
            });
        }
        let amps = self.amps.iter().step_by(1 << extra).copied().collect();
        Self::from_amplitudes(amps)
    }

    pub fn scale(&mut self, factor: Complex<T>) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn assert_state(state: &StateVector<f64>, expected: &[C]) {
        assert_eq!(state.dim(), expected.len());
        for (a, b) in state.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_state_examples() {
        let s = StateVector::<f64>::zero_state(2).unwrap();
        assert_state(&s, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let s = StateVector::<f64>::zero_state(1).unwrap();
        assert_state(&s, &[c(1., 0.), c(0., 0.)]);
        assert_abs_diff_eq!(StateVector::<f64>::zero_state(12).unwrap().norm_sqr(), 1.0);
    }

    #[test]
    fn zero_state_caps() {
        assert_eq!(
            StateVector::<f64>::zero_state(21),
            Err(SimError::TooManyQubits {
                requested: 21,
                max: 20
            })
        );
        assert_eq!(StateVector::<f64>::zero_state(0), Err(SimError::NoQubits));
    }

    #[test]
    fn rotation_examples() {
        let mut s = StateVector::<f64>::zero_state(1).unwrap();
        s.apply_rotation(Axis::X, 1, PI).unwrap();
        assert_state(&s, &[c(0., 0.), c(0., -1.)]);

        let mut s = StateVector::<f64>::zero_state(1).unwrap();
        s.apply_rotation(Axis::Y, 1, PI / 2.0).unwrap();
        assert_state(&s, &[c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]);

        let theta = 0.7;
        let mut s = StateVector::<f64>::zero_state(1).unwrap();
        s.apply_rotation(Axis::Z, 1, theta).unwrap();
        assert_state(&s, &[C::from_polar(1.0, -theta / 2.0), c(0., 0.)]);
    }

    #[test]
    fn rotation_out_of_range() {
        let mut s = StateVector::<f64>::zero_state(2).unwrap();
        assert!(matches!(
            s.apply_rotation(Axis::X, 3, 0.1),
            Err(SimError::QubitOutOfRange { qubit: 3, .. })
        ));
        assert!(s.apply_rotation(Axis::X, 0, 0.1).is_err());
    }

    #[test]
    fn cz_examples() {
        let mut s = StateVector::<f64>::basis_state(3, 2).unwrap();
        s.apply_cz(1, 2).unwrap();
        assert_state(&s, &[c(0., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);

        let mut s = StateVector::<f64>::basis_state(1, 2).unwrap();
        s.apply_cz(1, 2).unwrap();
        assert_state(&s, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);

        assert_eq!(s.apply_cz(2, 2), Err(SimError::RepeatedQubit(2)));
        assert!(s.apply_cz(1, 5).is_err());
    }

    #[test]
    fn basis_encode_examples() {
        let bits: BitString = "10".parse().unwrap();
        let s = StateVector::<f64>::basis_encode(&bits, 3).unwrap();
        let p = s.probabilities();
        assert_abs_diff_eq!(p[4], 1.0, epsilon = 1e-12);

        let bits: BitString = "0011".parse().unwrap();
        let s = StateVector::<f64>::basis_encode(&bits, 4).unwrap();
        assert_abs_diff_eq!(s.probabilities()[3], 1.0, epsilon = 1e-12);
        // (-i)^2 global phase
        assert_abs_diff_eq!(s.amplitudes()[3].re, -1.0, epsilon = 1e-12);

        let bits: BitString = "00".parse().unwrap();
        let s = StateVector::<f64>::basis_encode(&bits, 2).unwrap();
        assert_eq!(s.amplitudes()[0], c(1., 0.));

        let bits: BitString = "000".parse().unwrap();
        assert!(matches!(
            StateVector::<f64>::basis_encode(&bits, 2),
            Err(SimError::EncodingTooWide { bits: 3, total: 2 })
        ));
    }

    #[test]
    fn basis_encode_is_exhaustively_the_index_state() {
        for n in 1..=5 {
            for i in 0..1usize << n {
                let bits = BitString::from_index(i, n);
                let s = StateVector::<f64>::basis_encode(&bits, n + 1).unwrap();
                let p = s.probabilities();
                assert_abs_diff_eq!(p[i << 1], 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn norm_survives_a_thousand_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10;
        let mut s = StateVector::<f64>::zero_state(n).unwrap();
        for _ in 0..1000 {
            let q = rng.gen_range(1..=n);
            match rng.gen_range(0..4) {
                0 => s.apply_cz(q, q % n + 1).unwrap(),
                k => {
                    let axis = [Axis::X, Axis::Y, Axis::Z][k - 1];
                    s.apply_rotation(axis, q, rng.gen_range(-7.0..7.0)).unwrap();
                }
            }
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gates_act_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let random = |rng: &mut ChaCha8Rng| {
            let amps = (0..8).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            StateVector::<f64>::from_amplitudes(amps).unwrap()
        };
        let (a, b) = (random(&mut rng), random(&mut rng));
        let (x, y) = (c(0.3, -1.1), c(-0.7, 0.4));
        let mix = |u: &StateVector<f64>, v: &StateVector<f64>| {
            let amps = u.amplitudes().iter().zip(v.amplitudes()).map(|(p, q)| x * p + y * q).collect();
            StateVector::from_amplitudes(amps).unwrap()
        };
        let circuit = |s: &mut StateVector<f64>| {
            s.apply_rotation(Axis::Y, 1, 0.8).unwrap();
            s.apply_cz(1, 3).unwrap();
            s.apply_rotation(Axis::X, 3, -2.1).unwrap();
            s.apply_rotation(Axis::Z, 2, 1.7).unwrap();
        };
        let mut lhs = mix(&a, &b);
        circuit(&mut lhs);
        let (mut ua, mut ub) = (a.clone(), b.clone());
        circuit(&mut ua);
        circuit(&mut ub);
        let rhs = mix(&ua, &ub);
        for (l, r) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::<f64>::zero_state(1).unwrap();
        assert_abs_diff_eq!(s.expectation_z(1).unwrap(), 1.0);
        let mut s = StateVector::<f64>::zero_state(1).unwrap();
        s.apply_rotation(Axis::Y, 1, PI / 2.0).unwrap();
        assert_abs_diff_eq!(s.expectation_z(1).unwrap(), 0.0, epsilon = 1e-12);
        let s = StateVector::<f64>::basis_encode(&"1".parse().unwrap(), 1).unwrap();
        assert_abs_diff_eq!(s.expectation_z(1).unwrap(), -1.0, epsilon = 1e-12);
        assert!(s.expectation_z(2).is_err());
    }

    fn bell() -> StateVector<f64> {
        let h = FRAC_1_SQRT_2;
        StateVector::from_amplitudes(vec![c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]).unwrap()
    }

    #[test]
    fn probabilities_examples() {
        let p = bell().probabilities();
        for (a, b) in p.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let p = StateVector::<f64>::zero_state(3).unwrap().probabilities();
        assert_eq!(p, vec![1., 0., 0., 0., 0., 0., 0., 0.]);
    }

    #[test]
    fn sampling_examples() {
        let s = StateVector::<f64>::basis_state(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = s.sample_bitstrings(5, &mut rng);
        assert!(draws.iter().all(|b| b.to_string() == "01"));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = bell().sample_bitstrings(100_000, &mut rng);
        let ones = draws.iter().filter(|b| b.index() == 3).count() as f64 / 1e5;
        assert!((ones - 0.5).abs() < 0.01, "frequency {ones}");
        assert!(draws.iter().all(|b| b.index() == 0 || b.index() == 3));

        let a = bell().sample_bitstrings(50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = bell().sample_bitstrings(50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn trailing_zero_padding_roundtrip() {
        let s = bell();
        let padded = s.with_trailing_zeros(2).unwrap();
        assert_eq!(padded.n_qubits(), 4);
        assert_abs_diff_eq!(padded.probabilities()[0b1100], 0.5, epsilon = 1e-12);
        assert_eq!(padded.project_trailing_zeros(2).unwrap(), s);
    }

    #[test]
    fn f32_state_works() {
        let mut s = StateVector::<f32>::zero_state(3).unwrap();
        s.apply_rotation(Axis::Y, 2, 1.0).unwrap();
        s.apply_cz(1, 2).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
