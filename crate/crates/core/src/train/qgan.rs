use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState, DEFAULT_LR};
use super::generator::GeneratorModel;
use crate::circuits::{DiscriminatorSpec, Entangler, GeneratorSpec, NoiseMode};
use crate::error::{Error, Result};
use crate::eval;
use crate::neural::{AmplitudeModel, MlpModel};
use crate::num::Real;
use crate::statevec::{Axis, BitString};

/// `loss_D = <y_fake> - <y_real>` and `loss_G = -<y_fake>`.
///
/// The discriminator minimizes `loss_D` and the generator minimizes
/// `loss_G`; at the equilibrium every label is 1/2, giving `(0, -1/2)`.
pub fn wgan_losses<T: Real>(
    disc: &DiscriminatorSpec<T>,
    generator: &GeneratorModel<T>,
    real_batch: &[BitString],
    noise_batch: &[Vec<T>],
) -> Result<(T, T)> {
    if noise_batch.is_empty() {
        return Err(Error::Empty("noise batch"));
    }
    let real = disc.batch_real_label(real_batch)?;
    let mut fake = T::zero();
    for z in noise_batch {
        fake += disc.fake_label(&generator.state(z)?)?;
    }
    fake /= T::of(noise_batch.len() as f64);
    Ok((fake - real, -fake))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Reupload,
    Linear,
    Amplitude,
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Trainable layers; ignored by the classical toy models.
    #[serde(default)]
    pub depth: usize,
    /// Rotation axis of the noise gates; defaults per kind.
    #[serde(default)]
    pub noise_axis: Option<Axis>,
    /// Noise angles are uniform on `[0, noise_range)`; `2 pi` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_range: Option<f64>,
    #[serde(default)]
    pub entangler: Entangler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscriminatorConfig {
    pub depth: usize,
    #[serde(default)]
    pub n_aux: usize,
    #[serde(default)]
    pub entangler: Entangler,
}

/// How real samples are drawn for each discriminator evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealBatch {
    /// Whole dataset up to 16 items, otherwise minibatches of 8.
    Auto,
    Full,
    Minibatch(usize),
}

impl RealBatch {
    fn size(self, n: usize) -> usize {
        match self {
            RealBatch::Auto if n <= 16 => n,
            RealBatch::Auto => 8,
            RealBatch::Full => n,
            RealBatch::Minibatch(k) => k.min(n),
        }
    }
}

fn default_n_critic() -> usize {
    5
}
fn default_lr() -> f64 {
    DEFAULT_LR
}
fn default_noise_batch() -> usize {
    8
}
fn default_real_batch() -> RealBatch {
    RealBatch::Auto
}
fn default_eval_noise() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QganConfig {
    pub generator: GeneratorConfig,
    pub discriminator: DiscriminatorConfig,
    /// Discriminator updates per generator update.
    #[serde(default = "default_n_critic")]
    pub n_critic: usize,
    #[serde(default = "default_lr")]
    pub lr_g: f64,
    #[serde(default = "default_lr")]
    pub lr_d: f64,
    #[serde(default = "default_noise_batch")]
    pub noise_batch: usize,
    #[serde(default = "default_real_batch")]
    pub real_batch: RealBatch,
    /// Generator updates.
    pub iterations: usize,
    /// Noise draws used to estimate the final generator distribution.
    #[serde(default = "default_eval_noise")]
    pub eval_noise_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl QganConfig {
    pub fn new(generator: GeneratorConfig, discriminator: DiscriminatorConfig, iterations: usize) -> Self {
        Self {
            generator,
            discriminator,
            n_critic: default_n_critic(),
            lr_g: DEFAULT_LR,
            lr_d: DEFAULT_LR,
            noise_batch: default_noise_batch(),
            real_batch: RealBatch::Auto,
            iterations,
            eval_noise_samples: default_eval_noise(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_critic == 0 {
            return bad("n_critic must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.noise_batch == 0 || self.eval_noise_samples == 0 {
            return bad("noise batch sizes must be positive");
        }
        if let RealBatch::Minibatch(0) = self.real_batch {
            return bad("real minibatch must be positive");
        }
        if !(self.lr_g > 0.0 && self.lr_d > 0.0) {
            return bad("learning rates must be positive");
        }
        if let Some(r) = self.generator.noise_range {
            if !(r.is_finite() && r > 0.0) {
                return bad("noise_range must be positive");
            }
        }
        Ok(())
    }

    pub fn build_generator<T: Real, R: Rng + ?Sized>(
        &self,
        n_qubits: usize,
        rng: &mut R,
    ) -> Result<GeneratorModel<T>> {
        let g = &self.generator;
        let circuit = |mode: NoiseMode, rng: &mut R| -> Result<GeneratorModel<T>> {
            let spec = GeneratorSpec::random(
                n_qubits,
                g.depth,
                mode,
                g.noise_axis.unwrap_or(mode.default_axis()),
                g.entangler,
                rng,
            )?;
            Ok(GeneratorModel::Circuit(match g.noise_range {
                Some(r) => spec.with_noise_range(r)?,
                None => spec,
            }))
        };
        match g.kind {
            GeneratorKind::Reupload => circuit(NoiseMode::Reupload, rng),
            GeneratorKind::Linear => circuit(NoiseMode::Linear, rng),
            GeneratorKind::Amplitude => Ok(GeneratorModel::Amplitude(AmplitudeModel::random(n_qubits, rng)?)),
            GeneratorKind::Mlp => {
                if n_qubits != 4 {
                    return Err(Error::Config(format!(
                        "the mlp toy generator emits 16 amplitudes, data has {n_qubits} bits"
                    )));
                }
                Ok(GeneratorModel::Mlp(MlpModel::random(rng)))
            }
        }
    }

    pub fn build_discriminator<T: Real, R: Rng + ?Sized>(
        &self,
        n_data: usize,
        rng: &mut R,
    ) -> Result<DiscriminatorSpec<T>> {
        let d = &self.discriminator;
        DiscriminatorSpec::random(n_data, d.n_aux, d.depth, d.entangler, rng)
    }
}

/// Per-run record of an adversarial training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    /// One entry per generator iteration.
    pub loss_d: Vec<f64>,
    pub loss_g: Vec<f64>,
    pub discriminator_updates: usize,
    pub generator_updates: usize,
    pub generator_params: Vec<f64>,
    pub discriminator_params: Vec<f64>,
    /// Exact generator distribution averaged over evaluation noise.
    pub distribution: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.loss_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss_d.is_empty()
    }
}

/// A finished run: the trace plus the trained models.
#[derive(Debug, Clone)]
pub struct QganRun<T: Real> {
    pub trace: RunTrace,
    pub generator: GeneratorModel<T>,
    pub discriminator: DiscriminatorSpec<T>,
}

fn draw_real<R: Rng + ?Sized>(data: &[BitString], size: usize, rng: &mut R) -> Vec<BitString> {
    if size >= data.len() {
        return data.to_vec();
    }
    sample(rng, data.len(), size)
        .into_iter()
        .map(|i| data[i].clone())
        .collect()
}

/// Gradient of `loss_D` with respect to the discriminator parameters.
fn discriminator_gradient<T: Real>(
    disc: &DiscriminatorSpec<T>,
    generator: &GeneratorModel<T>,
    real: &[BitString],
    noise: &[Vec<T>],
) -> Result<Vec<T>> {
    let mut grad = vec![T::zero(); disc.params().len()];
    let w_fake = T::one() / T::of(noise.len() as f64);
    for z in noise {
        let (_, g) = disc.label_and_gradient(&disc.pad(&generator.state(z)?)?)?;
        grad.iter_mut().zip(&g).for_each(|(a, &b)| *a += w_fake * b);
    }
    let w_real = T::one() / T::of(real.len() as f64);
    for x in real {
        let (_, g) = disc.label_and_gradient(&disc.encode(x)?)?;
        grad.iter_mut().zip(&g).for_each(|(a, &b)| *a -= w_real * b);
    }
    Ok(grad)
}

/// `loss_G`'s gradient and the fake labels it was computed from.
fn generator_gradient<T: Real>(
    disc: &DiscriminatorSpec<T>,
    generator: &GeneratorModel<T>,
    noise: &[Vec<T>],
) -> Result<(T, Vec<T>)> {
    let mut grad = vec![T::zero(); generator.params().len()];
    let mut fake = T::zero();
    let w = T::one() / T::of(noise.len() as f64);
    for z in noise {
        let (y, g) = generator.fake_label_gradient(disc, z)?;
        fake += w * y;
        grad.iter_mut().zip(&g).for_each(|(a, &b)| *a -= w * b);
    }
    Ok((fake, grad))
}

/// Wasserstein adversarial training on `data`.
pub fn train_qgan<T: Real>(config: &QganConfig, data: &[BitString]) -> Result<QganRun<T>> {
    train_qgan_with(config, data, |_, _, _| {})
}

/// [`train_qgan`] with a callback receiving `(iteration, loss_d, loss_g)`
/// after every generator update.
///
/// One seeded stream drives everything: discriminator init, generator init,
/// then per iteration `n_critic` x (real batch, noise batch) followed by the
/// generator's (real batch, noise batch), and finally the evaluation noise.
pub fn train_qgan_with<T: Real, F>(config: &QganConfig, data: &[BitString], mut on_step: F) -> Result<QganRun<T>>
where
    F: FnMut(usize, f64, f64),
{
    config.validate()?;
    let n_data = data.first().ok_or(Error::Empty("training data"))?.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut disc = config.build_discriminator::<T, _>(n_data, &mut rng)?;
    let mut generator = config.build_generator::<T, _>(n_data, &mut rng)?;
    let mut adam_d = AdamState::new(disc.params().len(), AdamConfig::with_lr(config.lr_d));
    let mut adam_g = AdamState::new(generator.params().len(), AdamConfig::with_lr(config.lr_g));
    let real_size = config.real_batch.size(data.len());

    let mut loss_d = Vec::with_capacity(config.iterations);
    let mut loss_g = Vec::with_capacity(config.iterations);
    for it in 0..config.iterations {
        for _ in 0..config.n_critic {
            let real = draw_real(data, real_size, &mut rng);
            let noise = generator.sample_noise(config.noise_batch, &mut rng);
            let grad = discriminator_gradient(&disc, &generator, &real, &noise)?;
            adam_d.step(disc.params_mut(), &grad)?;
        }
        let real = draw_real(data, real_size, &mut rng);
        let noise = generator.sample_noise(config.noise_batch, &mut rng);
        let (fake, grad) = generator_gradient(&disc, &generator, &noise)?;
        let real_label = disc.batch_real_label(&real)?;
        adam_g.step(generator.params_mut(), &grad)?;
        let (ld, lg) = ((fake - real_label).to_f64_lossy(), (-fake).to_f64_lossy());
        loss_d.push(ld);
        loss_g.push(lg);
        on_step(it, ld, lg);
    }

    let eval_noise = generator.sample_noise(config.eval_noise_samples, &mut rng);
    let distribution = eval::generator_distribution(&generator, &eval_noise)?;
    let trace = RunTrace {
        seed: config.seed,
        loss_d,
        loss_g,
        discriminator_updates: adam_d.t as usize,
        generator_updates: adam_g.t as usize,
        generator_params: generator.params().iter().map(|v| v.to_f64_lossy()).collect(),
        discriminator_params: disc.params().iter().map(|v| v.to_f64_lossy()).collect(),
        distribution: distribution.probs,
    };
    Ok(QganRun {
        trace,
        generator,
        discriminator: disc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bars_and_stripes_2x2;
    use crate::diff::finite_difference_gradient;
    use approx::assert_abs_diff_eq;

    fn small_config(kind: GeneratorKind) -> QganConfig {
        let mut c = QganConfig::new(
            GeneratorConfig {
                kind,
                depth: 2,
                noise_axis: None,
                noise_range: None,
                entangler: Entangler::Chain,
            },
            DiscriminatorConfig {
                depth: 2,
                n_aux: 0,
                entangler: Entangler::Chain,
            },
            6,
        );
        c.n_critic = 3;
        c.noise_batch = 4;
        c.eval_noise_samples = 10;
        c.seed = 42;
        c
    }

    #[test]
    fn half_labels_give_equilibrium_losses() {
        // R_y(pi/2) on qubit 1 sends every basis input to <Z_1> = 0
        let mut params = vec![0.0; 12];
        params[1] = std::f64::consts::FRAC_PI_2;
        let disc = DiscriminatorSpec::<f64>::new(4, 0, 1, params).unwrap();
        let mut c = vec![0.0; 16];
        c[0] = 1.0;
        let gen = GeneratorModel::Amplitude(AmplitudeModel::new(c).unwrap());
        let (ld, lg) = wgan_losses(&disc, &gen, &bars_and_stripes_2x2(), &[vec![]]).unwrap();
        assert_abs_diff_eq!(ld, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lg, -0.5, epsilon = 1e-12);
        // and the discriminator gradient vanishes when both sides coincide
        let g = discriminator_gradient(&disc, &gen, &bars_and_stripes_2x2(), &[vec![]]).unwrap();
        let (fake, _) = generator_gradient(&disc, &gen, &[vec![]]).unwrap();
        assert_abs_diff_eq!(fake, 0.5, epsilon = 1e-12);
        assert!(g.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn loss_bounds_for_separating_discriminator() {
        let disc = DiscriminatorSpec::<f64>::new(4, 0, 0, vec![]).unwrap();
        // identity disc: real 1000 -> 0; generator stuck on |0000> -> 1
        let mut c = vec![0.0; 16];
        c[0] = 1.0;
        let gen = GeneratorModel::Amplitude(AmplitudeModel::new(c).unwrap());
        let (ld, lg) = wgan_losses(&disc, &gen, &["1000".parse().unwrap()], &[vec![]]).unwrap();
        assert_abs_diff_eq!(ld, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lg, -1.0, epsilon = 1e-12);
        assert!(wgan_losses(&disc, &gen, &[], &[vec![]]).is_err());
        assert!(wgan_losses(&disc, &gen, &["1000".parse().unwrap()], &[]).is_err());
    }

    #[test]
    fn discriminator_gradient_matches_losses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = small_config(GeneratorKind::Reupload);
        let disc = cfg.build_discriminator::<f64, _>(4, &mut rng).unwrap();
        let gen = cfg.build_generator::<f64, _>(4, &mut rng).unwrap();
        let real = bars_and_stripes_2x2();
        let noise = gen.sample_noise(3, &mut rng);
        let g = discriminator_gradient(&disc, &gen, &real, &noise).unwrap();
        let fd = finite_difference_gradient(
            |p| {
                let mut d = disc.clone();
                d.params_mut().copy_from_slice(p);
                wgan_losses(&d, &gen, &real, &noise).unwrap().0
            },
            disc.params(),
            1e-5,
        );
        for (a, b) in g.iter().zip(&fd) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn generator_gradient_matches_losses() {
        for kind in [GeneratorKind::Reupload, GeneratorKind::Linear, GeneratorKind::Amplitude, GeneratorKind::Mlp] {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let cfg = small_config(kind);
            let disc = cfg.build_discriminator::<f64, _>(4, &mut rng).unwrap();
            let gen = cfg.build_generator::<f64, _>(4, &mut rng).unwrap();
            let noise = gen.sample_noise(3, &mut rng);
            let (_, g) = generator_gradient(&disc, &gen, &noise).unwrap();
            let fd = finite_difference_gradient(
                |p| {
                    let mut m = gen.clone();
                    m.params_mut().copy_from_slice(p);
                    wgan_losses(&disc, &m, &["0000".parse().unwrap()], &noise).unwrap().1
                },
                gen.params(),
                1e-5,
            );
            for (a, b) in g.iter().zip(&fd) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn run_accounting_and_determinism() {
        let cfg = small_config(GeneratorKind::Reupload);
        let data = bars_and_stripes_2x2();
        let a = train_qgan::<f64>(&cfg, &data).unwrap().trace;
        let b = train_qgan::<f64>(&cfg, &data).unwrap().trace;
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a.discriminator_updates, 3 * a.generator_updates);
        for (&d, &g) in a.loss_d.iter().zip(&a.loss_g) {
            assert!((-1.0..=1.0).contains(&d));
            assert!((-1.0..=0.0).contains(&g));
        }
        assert_abs_diff_eq!(a.distribution.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config(GeneratorKind::Mlp);
        cfg.n_critic = 0;
        assert!(train_qgan::<f64>(&cfg, &bars_and_stripes_2x2()).is_err());
        let cfg = small_config(GeneratorKind::Mlp);
        assert!(train_qgan::<f64>(&cfg, &["010101".parse().unwrap()]).is_err());
        assert!(train_qgan::<f64>(&cfg, &[]).is_err());
        let json = r#"{"generator":{"kind":"reupload","depth":2},"discriminator":{"depth":1},"iterations":3,"bogus":1}"#;
        assert!(serde_json::from_str::<QganConfig>(json).is_err());
        let json = r#"{"generator":{"kind":"reupload","depth":2},"discriminator":{"depth":1},"iterations":3}"#;
        let cfg: QganConfig = serde_json::from_str(json).unwrap();
        assert_eq!((cfg.n_critic, cfg.lr_d, cfg.lr_g, cfg.noise_batch), (5, 0.01, 0.01, 8));
    }
}
