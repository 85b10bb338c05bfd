use super::config::{
    discriminator, EvaluationConfig, Experiment, QganData, QganExperiment, SupervisedData,
    SupervisedExperiment,
};
use crate::circuits::Entangler;
use crate::data::SplitMode;
use crate::eval::Ordering;
use crate::train::{AdamConfig, DiscriminatorConfig, GeneratorConfig, GeneratorKind, QganConfig, SupervisedConfig};

/// A named, ready-to-run experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Default sweep size.
    pub seeds: usize,
    pub experiment: Experiment,
}

/// Iterations for the bars-and-stripes runs with a circuit generator.
pub const BS_ITERATIONS: usize = 300;
/// Iterations for the classical toy generators, which are cheap to train.
pub const TOY_ITERATIONS: usize = 1000;
/// Iterations for the Ising adversarial run.
pub const ISING_ITERATIONS: usize = 500;

/// Upper end of the generator noise interval for the circuit presets.
/// Full-period noise averages the linear-noise generator to the maximally
/// mixed state and leaves the reuploading one close to it.
pub const CIRCUIT_NOISE_RANGE: f64 = 1.0;

/// Ising discriminator sweeps on the eight-spin chain.
const ISING_DISC_DEPTH: usize = 20;
const ISING_DISC_STEPS: usize = 1400;
const ISING_DISC_BATCH: usize = 8;

fn supervised(dataset: SupervisedData, discriminator: DiscriminatorConfig, training: SupervisedConfig) -> Experiment {
    Experiment::Supervised(SupervisedExperiment {
        dataset,
        discriminator,
        training,
    })
}

fn ising_disc(split: SplitMode, n_aux: usize) -> Experiment {
    // On an open chain the trailing aux qubits sit up to eight CZ hops from
    // the measured qubit; the ring puts the last one next to it.
    let disc = DiscriminatorConfig {
        entangler: Entangler::Ring,
        ..discriminator(ISING_DISC_DEPTH, n_aux)
    };
    supervised(
        SupervisedData::Ising { n_spins: 8, split },
        disc,
        SupervisedConfig {
            steps: ISING_DISC_STEPS,
            adam: AdamConfig::default(),
            batch_size: Some(ISING_DISC_BATCH),
            stop_when_perfect: false,
        },
    )
}

fn qgan(dataset: QganData, kind: GeneratorKind, gen_depth: usize, disc_depth: usize, n_aux: usize, iterations: usize) -> QganExperiment {
    QganExperiment {
        dataset,
        training: QganConfig::new(
            GeneratorConfig {
                kind,
                depth: gen_depth,
                noise_axis: None,
                noise_range: match kind {
                    GeneratorKind::Reupload | GeneratorKind::Linear => Some(CIRCUIT_NOISE_RANGE),
                    GeneratorKind::Amplitude | GeneratorKind::Mlp => None,
                },
                entangler: Entangler::Chain,
            },
            discriminator(disc_depth, n_aux),
            iterations,
        ),
        evaluation: EvaluationConfig::default(),
    }
}

fn bs_qgan(kind: GeneratorKind, gen_depth: usize) -> Experiment {
    let iterations = match kind {
        GeneratorKind::Amplitude | GeneratorKind::Mlp => TOY_ITERATIONS,
        GeneratorKind::Reupload | GeneratorKind::Linear => BS_ITERATIONS,
    };
    Experiment::Qgan(qgan(QganData::BarsAndStripes, kind, gen_depth, 20, 0, iterations))
}

/// Every preset, in listing order.
pub fn all() -> Vec<Preset> {
    let mut ising = qgan(
        QganData::IsingLowEnergy {
            n_spins: 6,
            count: 8,
            fraction: 0.25,
        },
        GeneratorKind::Reupload,
        20,
        20,
        4,
        ISING_ITERATIONS,
    );
    ising.evaluation = EvaluationConfig {
        sample_noise: 100,
        shots_per_noise: 100,
        ordering: Ordering::EnergySorted,
    };
    vec![
        Preset {
            name: "disc-bs",
            description: "supervised discriminator separating the 6 bars-and-stripes images from the other 10 inputs (depth 20, no aux)",
            seeds: 20,
            experiment: supervised(
                SupervisedData::BarsAndStripes,
                discriminator(20, 0),
                SupervisedConfig {
                    steps: 500,
                    ..Default::default()
                },
            ),
        },
        Preset {
            name: "disc-ising-balanced",
            description: "ring-entangled depth-20 discriminator on all 256 states of the 8-spin chain, lower vs upper half, no aux",
            seeds: 10,
            experiment: ising_disc(SplitMode::Balanced, 0),
        },
        Preset {
            name: "disc-ising-imbalanced",
            description: "ring-entangled depth-20 discriminator on the 8-spin chain, 20 lowest states vs the other 236, no aux",
            seeds: 10,
            experiment: ising_disc(SplitMode::ImbalancedFull { n_low: 20 }, 0),
        },
        Preset {
            name: "disc-ising-imbalanced-aux",
            description: "as disc-ising-imbalanced with 4 auxiliary qubits",
            seeds: 10,
            experiment: ising_disc(SplitMode::ImbalancedFull { n_low: 20 }, 4),
        },
        Preset {
            name: "disc-ising-reduced",
            description: "ring-entangled depth-20 discriminator on the 20 lowest 8-spin chain states vs 60 random others, no aux",
            seeds: 10,
            experiment: ising_disc(SplitMode::Reduced { n_low: 20, n_high: 60 }, 0),
        },
        Preset {
            name: "qgan-toy-amplitude",
            description: "noiseless classical amplitude generator against a depth-20 quantum discriminator on bars and stripes",
            seeds: 20,
            experiment: bs_qgan(GeneratorKind::Amplitude, 0),
        },
        Preset {
            name: "qgan-toy-mlp",
            description: "classical MLP generator (8-8-16, noise input) against a depth-20 quantum discriminator on bars and stripes",
            seeds: 20,
            experiment: bs_qgan(GeneratorKind::Mlp, 0),
        },
        Preset {
            name: "qgan-reupload-bs",
            description: "noise-reuploading quantum generator (depth 40) vs quantum discriminator (depth 20) on bars and stripes",
            seeds: 20,
            experiment: bs_qgan(GeneratorKind::Reupload, 40),
        },
        Preset {
            name: "qgan-linear-noise-bs",
            description: "quantum generator with a single noise layer at the input (depth 40) on bars and stripes",
            seeds: 20,
            experiment: bs_qgan(GeneratorKind::Linear, 40),
        },
        Preset {
            name: "qgan-ising",
            description: "reuploading QGAN on 8 low-energy states of the 6-spin chain (depths 20/20, 4 aux), 100 x 100 shot sampling",
            seeds: 10,
            experiment: Experiment::Qgan(ising),
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}
