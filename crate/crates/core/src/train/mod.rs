//! Optimizer, losses and training loops.

mod adam;
mod generator;
mod qgan;
mod supervised;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use generator::{sample_noise, GeneratorModel, NoiseDistribution};
pub use qgan::{
    train_qgan, train_qgan_with, wgan_losses, DiscriminatorConfig, GeneratorConfig, GeneratorKind,
    QganConfig, QganRun, RealBatch, RunTrace,
};
pub use supervised::{
    accuracy, predict_all, supervised_loss, train_discriminator_supervised, Accuracy, Prediction,
    SupervisedConfig, SupervisedReport,
};

/// Seed of run `index` within a sweep started from `master` (two rounds of
/// SplitMix64 mixing).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}
