use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::acquisition::{ALConfig, PsoConfig};
use crate::nn::MlpSpec;
use crate::samplers::SamplerKind;
use crate::surrogates::ModelKind;
use crate::{Error, Result};

/// How a training dataset is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    ActiveLearning,
    Sampler(SamplerKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::ActiveLearning => "al",
            Self::Sampler(s) => s.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "al" | "active" => Ok(Self::ActiveLearning),
            other => other.parse().map(Self::Sampler),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Optional changes to the forward/inverse network recipe.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TandemOverrides {
    pub hidden: Option<Vec<usize>>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub patience: Option<usize>,
}

impl TandemOverrides {
    pub fn apply(&self, mut spec: MlpSpec) -> MlpSpec {
        if let Some(h) = &self.hidden {
            spec.hidden = h.clone();
        }
        if let Some(v) = self.epochs {
            spec.epochs = v;
        }
        if let Some(v) = self.batch_size {
            spec.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            spec.learning_rate = v;
        }
        if let Some(v) = self.patience {
            spec.patience = v;
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub benchmark: String,
    pub methods: Vec<Method>,
    /// Evaluation budget; `None` takes the benchmark default.
    pub n_max: Option<usize>,
    pub repetitions: usize,
    pub seed: u64,
    /// Uncertainty model for active learning; `None` takes the benchmark default.
    pub model_kind: Option<ModelKind>,
    pub tandem: TandemOverrides,
    pub n0: usize,
    pub batch_k: usize,
    pub pso: PsoConfig,
    pub test_size: usize,
    pub save_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            benchmark: "sbr".into(),
            methods: vec![
                Method::ActiveLearning,
                Method::Sampler(SamplerKind::Random),
                Method::Sampler(SamplerKind::Lhs),
                Method::Sampler(SamplerKind::Bc),
                Method::Sampler(SamplerKind::Gfp),
            ],
            n_max: None,
            repetitions: 30,
            seed: 7,
            model_kind: None,
            tandem: TandemOverrides::default(),
            n0: 20,
            batch_k: 5,
            pso: PsoConfig::default(),
            test_size: 1000,
            save_models: false,
        }
    }
}

/// Budget and uncertainty model used for each benchmark when not overridden:
/// forest with 150 / 300 evaluations on the two analytic problems, deep
/// ensemble with 400 on the diffusion problem.
pub fn benchmark_defaults(benchmark: &str) -> Result<(usize, ModelKind)> {
    match benchmark.to_ascii_lowercase().as_str() {
        "aidlike" | "aid" => Ok((150, ModelKind::forest())),
        "psidlike" | "psid" => Ok((300, ModelKind::forest())),
        "sbr" => Ok((400, ModelKind::deep_ensemble())),
        other => Err(Error::Unknown {
            kind: "benchmark",
            name: other.to_owned(),
        }),
    }
}

impl ExperimentConfig {
    /// Fills defaults and checks invariants.
    pub fn resolved(&self) -> Result<Self> {
        let (n_max, kind) = benchmark_defaults(&self.benchmark)?;
        let mut cfg = self.clone();
        cfg.n_max.get_or_insert(n_max);
        cfg.model_kind.get_or_insert(kind);
        if cfg.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if cfg.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if cfg.test_size == 0 {
            return Err(Error::Config(
                "test set must hold at least one point".into(),
            ));
        }
        let mut seen = cfg.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != cfg.methods.len() {
            return Err(Error::Config("duplicate method".into()));
        }
        if cfg.methods.contains(&Method::ActiveLearning) {
            cfg.al_config()?.validate()?;
        }
        Ok(cfg)
    }

    pub fn n_max(&self) -> usize {
        self.n_max.expect("resolved config")
    }

    pub fn al_config(&self) -> Result<ALConfig> {
        let (default_n, default_kind) = benchmark_defaults(&self.benchmark)?;
        Ok(ALConfig {
            n0: self.n0,
            k: self.batch_k,
            n_max: self.n_max.unwrap_or(default_n),
            pso: self.pso.clone(),
            model_kind: self.model_kind.clone().unwrap_or(default_kind),
        })
    }

    pub fn tandem_spec(&self, d: usize, p: usize) -> MlpSpec {
        self.tandem.apply(MlpSpec::tandem_default(d, p))
    }
}
