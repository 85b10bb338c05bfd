use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::presets;
use crate::circuits::Entangler;
use crate::data::{SplitMode, DEFAULT_QUARTILE_FRACTION};
use crate::error::{Error, Result};
use crate::eval::Ordering;
use crate::train::{DiscriminatorConfig, QganConfig, SupervisedConfig};

/// Environment variable overriding the master seed.
pub const SEED_ENV: &str = "QGANLAB_SEED";
pub const DEFAULT_OUT: &str = "runs";

/// A config file as written by a user. Either `experiment` or `preset`
/// must be given; an explicit experiment takes precedence over the preset's.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Directory name under the output root; defaults to the preset name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    /// Master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of seeds in the sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Restricts the sweep to one run index; set in every run's echo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Supervised(SupervisedExperiment),
    Qgan(QganExperiment),
}

/// Discriminator trained on labelled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisedExperiment {
    pub dataset: SupervisedData,
    pub discriminator: DiscriminatorConfig,
    pub training: SupervisedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SupervisedData {
    /// All 16 four-bit strings, bars and stripes labelled 0.
    BarsAndStripes,
    /// Nearest-neighbour chain spectrum split into low and high states.
    Ising { n_spins: usize, split: SplitMode },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QganExperiment {
    pub dataset: QganData,
    /// Training settings; its `seed` is replaced by each run's seed.
    pub training: QganConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum QganData {
    BarsAndStripes,
    /// `count` states drawn per run from the low end of the chain spectrum.
    IsingLowEnergy {
        n_spins: usize,
        count: usize,
        #[serde(default = "default_quartile")]
        fraction: f64,
    },
}

fn default_quartile() -> f64 {
    DEFAULT_QUARTILE_FRACTION
}

/// Shot-based sampling of the trained generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Noise instances to sample from; no samples when zero.
    #[serde(default)]
    pub sample_noise: usize,
    #[serde(default)]
    pub shots_per_noise: usize,
    /// Bin order of `dist.json`; energy order needs Ising data.
    #[serde(default = "default_ordering")]
    pub ordering: Ordering,
}

fn default_ordering() -> Ordering {
    Ordering::BasisIndex
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            sample_noise: 0,
            shots_per_noise: 0,
            ordering: Ordering::BasisIndex,
        }
    }
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            Experiment::Supervised(s) => {
                if s.training.steps == 0 {
                    return bad("training.steps must be at least 1".into());
                }
                if let SupervisedData::Ising { n_spins, .. } = s.dataset {
                    if !(2..=16).contains(&n_spins) {
                        return bad(format!("n_spins = {n_spins} outside 2..=16"));
                    }
                }
            }
            Experiment::Qgan(q) => {
                q.training.validate()?;
                match q.dataset {
                    QganData::BarsAndStripes => {
                        if q.evaluation.ordering == Ordering::EnergySorted {
                            return bad("energy ordering needs Ising data".into());
                        }
                    }
                    QganData::IsingLowEnergy { n_spins, count, fraction } => {
                        if !(2..=16).contains(&n_spins) {
                            return bad(format!("n_spins = {n_spins} outside 2..=16"));
                        }
                        if count == 0 || !(fraction > 0.0 && fraction <= 1.0) {
                            return bad("ising-low-energy needs count >= 1 and 0 < fraction <= 1".into());
                        }
                    }
                }
                if (q.evaluation.sample_noise == 0) != (q.evaluation.shots_per_noise == 0) {
                    return bad("sample_noise and shots_per_noise must both be zero or both positive".into());
                }
            }
        }
        Ok(())
    }
}

/// Overrides coming from the command line and the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seeds: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Reads the master seed override from [`SEED_ENV`].
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
            self.seed = Some(seed);
        }
        Ok(self)
    }
}

/// Everything needed to execute a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExperiment {
    pub name: String,
    pub experiment: Experiment,
    pub master_seed: u64,
    pub seeds: usize,
    pub out: PathBuf,
    pub run: Option<usize>,
}

impl ResolvedExperiment {
    /// The config file that re-runs exactly run `index`.
    pub fn echo(&self, index: usize) -> ExperimentConfig {
        ExperimentConfig {
            preset: None,
            name: Some(self.name.clone()),
            experiment: Some(self.experiment.clone()),
            seed: Some(self.master_seed),
            seeds: Some(self.seeds),
            out: None,
            run: Some(index),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn resolve(self, overrides: &Overrides) -> Result<ResolvedExperiment> {
        let preset_name = overrides.preset.clone().or(self.preset);
        let preset = match &preset_name {
            Some(name) => Some(presets::find(name).ok_or_else(|| {
                Error::Config(format!("unknown preset {name:?}; see `qganlab presets`"))
            })?),
            None => None,
        };
        let experiment = match (self.experiment, &preset) {
            (Some(e), _) => e,
            (None, Some(p)) => p.experiment.clone(),
            (None, None) => return Err(Error::Config("config needs an experiment or a preset".into())),
        };
        experiment.validate()?;
        let name = self
            .name
            .or(preset_name)
            .ok_or_else(|| Error::Config("config needs a name when no preset is used".into()))?;
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(Error::Config(format!("{name:?} is not a usable directory name")));
        }
        let seeds = overrides
            .seeds
            .or(self.seeds)
            .or(preset.as_ref().map(|p| p.seeds))
            .unwrap_or(1);
        if seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        if let Some(run) = self.run {
            if run >= seeds {
                return Err(Error::Config(format!("run {run} out of range for {seeds} seeds")));
            }
        }
        Ok(ResolvedExperiment {
            name,
            experiment,
            master_seed: overrides.seed.or(self.seed).unwrap_or(0),
            seeds,
            out: overrides
                .out
                .clone()
                .or(self.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            run: self.run,
        })
    }
}

pub(crate) fn discriminator(depth: usize, n_aux: usize) -> DiscriminatorConfig {
    DiscriminatorConfig {
        depth,
        n_aux,
        entangler: Entangler::Chain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"preset":"disc-bs","colour":1}"#).is_err());
        let nested = r#"{"name":"x","experiment":{"supervised":{"dataset":"bars-and-stripes",
            "discriminator":{"depth":2,"extra":0},"training":{"steps":3}}}}"#;
        assert!(ExperimentConfig::from_json(nested).is_err());
    }

    #[test]
    fn explicit_experiment_parses_and_resolves() {
        let text = r#"{"name":"x","seeds":2,"experiment":{"qgan":{
            "dataset":{"ising-low-energy":{"n_spins":6,"count":8}},
            "training":{"generator":{"kind":"reupload","depth":2},"discriminator":{"depth":2,"n_aux":1},"iterations":3},
            "evaluation":{"sample_noise":2,"shots_per_noise":5,"ordering":"energy_sorted"}}}}"#;
        let r = ExperimentConfig::from_json(text).unwrap().resolve(&Overrides::default()).unwrap();
        assert_eq!((r.name.as_str(), r.seeds, r.master_seed), ("x", 2, 0));
        let echo = serde_json::to_string(&r.echo(1)).unwrap();
        let again = ExperimentConfig::from_json(&echo).unwrap().resolve(&Overrides::default()).unwrap();
        assert_eq!(again.experiment, r.experiment);
        assert_eq!(again.run, Some(1));
    }

    #[test]
    fn overrides_win() {
        let cfg = ExperimentConfig {
            preset: Some("disc-bs".into()),
            seed: Some(3),
            seeds: Some(4),
            ..Default::default()
        };
        let o = Overrides {
            seeds: Some(2),
            seed: Some(11),
            ..Default::default()
        };
        let r = cfg.resolve(&o).unwrap();
        assert_eq!((r.seeds, r.master_seed, r.name.as_str()), (2, 11, "disc-bs"));
    }

    #[test]
    fn invalid_configs() {
        let none = ExperimentConfig::default();
        assert!(none.resolve(&Overrides::default()).is_err());
        let unknown = ExperimentConfig {
            preset: Some("nope".into()),
            ..Default::default()
        };
        assert!(unknown.resolve(&Overrides::default()).is_err());
        let zero = ExperimentConfig {
            preset: Some("disc-bs".into()),
            seeds: Some(0),
            ..Default::default()
        };
        assert!(zero.resolve(&Overrides::default()).is_err());
        let bad_name = ExperimentConfig {
            preset: Some("disc-bs".into()),
            name: Some("../x".into()),
            ..Default::default()
        };
        assert!(bad_name.resolve(&Overrides::default()).is_err());
    }
}
