//! Classical toy generators whose outputs are read as state amplitudes.
//!
//! [`AmplitudeModel`] holds the `2^N` amplitudes directly and ignores noise.
//! [`MlpModel`] maps a noise vector through `8 -> 8 (ReLU) -> 16 (tanh)`.
//! Both normalize their output vector before it is handed to the
//! discriminator, and both differentiate through that normalization.

use num_complex::Complex;
use rand::Rng;

use crate::circuits::DiscriminatorSpec;
use crate::error::{check_len, Error, Result};
use crate::num::Real;
use crate::statevec::StateVector;

/// Unit-norm real state from raw amplitudes, with the norm for the chain rule.
fn normalize<T: Real>(raw: &[T]) -> Result<(Vec<T>, T)> {
    let norm = raw.iter().map(|&v| v * v).sum::<T>().sqrt();
    if !norm.is_finite() || norm <= T::zero() {
        return Err(Error::DegenerateState);
    }
    Ok((raw.iter().map(|&v| v / norm).collect(), norm))
}

fn to_state<T: Real>(amps: &[T]) -> Result<StateVector<T>> {
    Ok(StateVector::from_amplitudes(
        amps.iter().map(|&a| Complex::new(a, T::zero())).collect(),
    )?)
}

/// Label of a real-amplitude generator state and `d y / d raw`.
///
/// With `psi = c / |c|` and `d y = Re <chi | d psi>`, the raw gradient is
/// `(I - psi psi^T) Re(chi) / |c|`.
fn label_and_raw_gradient<T: Real>(
    disc: &DiscriminatorSpec<T>,
    raw: &[T],
) -> Result<(T, Vec<T>)> {
    let (psi, norm) = normalize(raw)?;
    let (label, chi) = disc.fake_label_costate(&to_state(&psi)?)?;
    let g_psi: Vec<T> = chi.amplitudes().iter().map(|c| c.re).collect();
    let along = psi.iter().zip(&g_psi).map(|(&p, &g)| p * g).sum::<T>();
    let g_raw = psi
        .iter()
        .zip(&g_psi)
        .map(|(&p, &g)| (g - p * along) / norm)
        .collect();
    Ok((label, g_raw))
}

/// `|psi> = sum_i c_i |i> / |c|` with `2^N` trainable real `c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeModel<T: Real> {
    pub c: Vec<T>,
}

impl<T: Real> AmplitudeModel<T> {
    pub fn new(c: Vec<T>) -> Result<Self> {
        if !c.len().is_power_of_two() || c.len() < 2 {
            return Err(Error::InvalidCount(format!(
                "{} amplitudes is not a power of two",
                c.len()
            )));
        }
        Ok(Self { c })
    }

    /// Amplitudes drawn uniformly from `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..1usize << n_qubits)
                .map(|_| T::of(rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.c.len().trailing_zeros() as usize
    }

    pub fn state(&self) -> Result<StateVector<T>> {
        let (psi, _) = normalize(&self.c)?;
        to_state(&psi)
    }

    /// `y_fake` and `d y_fake / d c`.
    pub fn fake_label_gradient(&self, disc: &DiscriminatorSpec<T>) -> Result<(T, Vec<T>)> {
        label_and_raw_gradient(disc, &self.c)
    }
}

pub const MLP_INPUT: usize = 8;
pub const MLP_HIDDEN: usize = 8;
pub const MLP_OUTPUT: usize = 16;

/// Feed-forward `8 -> 8 -> 16` net, ReLU hidden layer, tanh output.
///
/// Parameters live in one flat vector ordered `w1 (8x8, row major), b1,
/// w2 (16x8, row major), b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T: Real> {
    params: Vec<T>,
}

const W1: usize = 0;
const B1: usize = W1 + MLP_HIDDEN * MLP_INPUT;
const W2: usize = B1 + MLP_HIDDEN;
const B2: usize = W2 + MLP_OUTPUT * MLP_HIDDEN;
pub const MLP_PARAMS: usize = B2 + MLP_OUTPUT;

struct Forward<T> {
    hidden_pre: Vec<T>,
    hidden: Vec<T>,
    out: Vec<T>,
}

impl<T: Real> MlpModel<T> {
    pub fn from_params(params: Vec<T>) -> Result<Self> {
        check_len("mlp parameters", MLP_PARAMS, params.len())?;
        Ok(Self { params })
    }

    /// Weights and biases uniform on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut params = Vec::with_capacity(MLP_PARAMS);
        for (count, fan_in) in [
            (MLP_HIDDEN * MLP_INPUT + MLP_HIDDEN, MLP_INPUT),
            (MLP_OUTPUT * MLP_HIDDEN + MLP_OUTPUT, MLP_HIDDEN),
        ] {
            let bound = 1.0 / (fan_in as f64).sqrt();
            params.extend((0..count).map(|_| T::of(rng.gen_range(-bound..bound))));
        }
        Self { params }
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn n_qubits(&self) -> usize {
        MLP_OUTPUT.trailing_zeros() as usize
    }

    fn forward(&self, z: &[T]) -> Result<Forward<T>> {
        check_len("mlp noise input", MLP_INPUT, z.len())?;
        let p = &self.params;
        let hidden_pre: Vec<T> = (0..MLP_HIDDEN)
            .map(|h| {
                let row = &p[W1 + h * MLP_INPUT..W1 + (h + 1) * MLP_INPUT];
                row.iter().zip(z).map(|(&w, &x)| w * x).sum::<T>() + p[B1 + h]
            })
            .collect();
        let hidden: Vec<T> = hidden_pre.iter().map(|&v| v.max(T::zero())).collect();
        let out = (0..MLP_OUTPUT)
            .map(|o| {
                let row = &p[W2 + o * MLP_HIDDEN..W2 + (o + 1) * MLP_HIDDEN];
                (row.iter().zip(&hidden).map(|(&w, &x)| w * x).sum::<T>() + p[B2 + o]).tanh()
            })
            .collect();
        Ok(Forward {
            hidden_pre,
            hidden,
            out,
        })
    }

    /// Raw (unnormalized) network output.
    pub fn output(&self, z: &[T]) -> Result<Vec<T>> {
        Ok(self.forward(z)?.out)
    }

    pub fn state(&self, z: &[T]) -> Result<StateVector<T>> {
        let (psi, _) = normalize(&self.forward(z)?.out)?;
        to_state(&psi)
    }

    /// `y_fake(z)` and its gradient with respect to every weight and bias.
    pub fn fake_label_gradient(
        &self,
        disc: &DiscriminatorSpec<T>,
        z: &[T],
    ) -> Result<(T, Vec<T>)> {
        let fwd = self.forward(z)?;
        let (label, g_out) = label_and_raw_gradient(disc, &fwd.out)?;
        let p = &self.params;
        let mut grad = vec![T::zero(); MLP_PARAMS];

        let g_pre2: Vec<T> = g_out
            .iter()
            .zip(&fwd.out)
            .map(|(&g, &a)| g * (T::one() - a * a))
            .collect();
        let mut g_hidden = [T::zero(); MLP_HIDDEN];
        for (o, &g) in g_pre2.iter().enumerate() {
            grad[B2 + o] = g;
            for h in 0..MLP_HIDDEN {
                grad[W2 + o * MLP_HIDDEN + h] = g * fwd.hidden[h];
                g_hidden[h] += g * p[W2 + o * MLP_HIDDEN + h];
            }
        }
        for h in 0..MLP_HIDDEN {
            let g = if fwd.hidden_pre[h] > T::zero() {
                g_hidden[h]
            } else {
                T::zero()
            };
            grad[B1 + h] = g;
            for (i, &x) in z.iter().enumerate() {
                grad[W1 + h * MLP_INPUT + i] = g * x;
            }
        }
        Ok((label, grad))
    }
}

/// Either toy generator, with an optional noise vector (ignored by the
/// amplitude model).
pub fn toy_state<T: Real>(model: &ToyModel<T>, z: Option<&[T]>) -> Result<StateVector<T>> {
    match model {
        ToyModel::Amplitude(m) => m.state(),
        ToyModel::Mlp(m) => m.state(z.ok_or(Error::Empty("mlp noise input"))?),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ToyModel<T: Real> {
    Amplitude(AmplitudeModel<T>),
    Mlp(MlpModel<T>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::Entangler;
    use crate::diff::finite_difference_gradient;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn disc(seed: u64) -> DiscriminatorSpec<f64> {
        DiscriminatorSpec::random(4, 0, 3, Entangler::Chain, &mut ChaCha8Rng::seed_from_u64(seed))
            .unwrap()
    }

    fn tvd(p: &[f64], q: &[f64]) -> f64 {
        0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    #[test]
    fn amplitude_examples() {
        let mut c = vec![0.0; 16];
        c[0] = 1.0;
        let s = AmplitudeModel::new(c.clone()).unwrap().state().unwrap();
        assert_abs_diff_eq!(s.probabilities()[0], 1.0);
        c[0] = 2.0;
        c[1] = 2.0;
        let s = AmplitudeModel::new(c).unwrap().state().unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(matches!(
            AmplitudeModel::new(vec![0.0; 16]).unwrap().state(),
            Err(Error::DegenerateState)
        ));
        assert!(toy_state(&ToyModel::Amplitude(AmplitudeModel::new(vec![1.0; 4]).unwrap()), None).is_ok());
    }

    #[test]
    fn mlp_distinct_noise_gives_distinct_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = MlpModel::<f64>::random(&mut rng);
        let z1: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z2: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p1 = m.state(&z1).unwrap().probabilities();
        let p2 = m.state(&z2).unwrap().probabilities();
        assert!(tvd(&p1, &p2) > 0.0);
        assert_abs_diff_eq!(p1.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(m.state(&z1[..7]).is_err());
    }

    #[test]
    fn amplitude_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = disc(10);
        let m = AmplitudeModel::<f64>::random(4, &mut rng).unwrap();
        let (_, g) = m.fake_label_gradient(&d).unwrap();
        let fd = finite_difference_gradient(
            |c| d.fake_label(&AmplitudeModel::new(c.to_vec()).unwrap().state().unwrap()).unwrap(),
            &m.c,
            1e-5,
        );
        for (a, b) in g.iter().zip(&fd) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
        // scale invariance: no component along c
        let along: f64 = g.iter().zip(&m.c).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(along, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn amplitude_label_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = disc(12);
        let m = AmplitudeModel::<f64>::random(4, &mut rng).unwrap();
        let scaled = AmplitudeModel::new(m.c.iter().map(|v| v * 3.7).collect()).unwrap();
        assert_abs_diff_eq!(
            d.fake_label(&m.state().unwrap()).unwrap(),
            d.fake_label(&scaled.state().unwrap()).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn mlp_backprop_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..10 {
            let d = disc(100 + trial);
            let m = MlpModel::<f64>::random(&mut rng);
            let z: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (label, g) = m.fake_label_gradient(&d, &z).unwrap();
            assert_abs_diff_eq!(label, d.fake_label(&m.state(&z).unwrap()).unwrap(), epsilon = 1e-14);
            let fd = finite_difference_gradient(
                |p| {
                    let m2 = MlpModel::from_params(p.to_vec()).unwrap();
                    d.fake_label(&m2.state(&z).unwrap()).unwrap()
                },
                m.params(),
                1e-5,
            );
            for (a, b) in g.iter().zip(&fd) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn mlp_zero_last_layer_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut m = MlpModel::<f64>::random(&mut rng);
        m.params_mut()[W2..].iter_mut().for_each(|v| *v = 0.0);
        let z = [0.5; 8];
        assert!(matches!(m.state(&z), Err(Error::DegenerateState)));
        assert!(matches!(
            m.fake_label_gradient(&disc(1), &z),
            Err(Error::DegenerateState)
        ));
    }
}
