use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::UncertaintyPredictor;
use crate::nn::{mlp_init, mlp_train, Activation, LossKind, MlpModel, MlpSpec};
use crate::numcore::{minmax_fit, ScalerParams, Seed};
use crate::{Error, LabeledDataset, Real, Result};

pub const MIN_ENSEMBLE_SAMPLES: usize = 10;

/// Deep-ensemble hyperparameters. Defaults: 10 members of 100-200-100 ReLU
/// MLPs, Adam at 1e-3, 200 epochs, L2 1e-4, batches of `min(200, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeepEnsembleConfig {
    pub members: usize,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
}

impl Default for DeepEnsembleConfig {
    fn default() -> Self {
        Self {
            members: 10,
            hidden: vec![100, 200, 100],
            epochs: 200,
            learning_rate: 1e-3,
            l2: 1e-4,
            batch_size: 200,
        }
    }
}

impl DeepEnsembleConfig {
    pub fn member_spec(&self, input_dim: usize, output_dim: usize) -> MlpSpec {
        MlpSpec {
            input_dim,
            hidden: self.hidden.clone(),
            output_dim,
            activation: Activation::Relu,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            val_fraction: 0.0,
            patience: 1,
            l2: self.l2,
        }
    }
}

/// One ensemble member: an input scaler followed by an MLP on raw outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnsembleMember<T: Real> {
    pub scaler: ScalerParams<T>,
    pub net: MlpModel<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnsembleModel<T: Real> {
    pub members: Vec<EnsembleMember<T>>,
}

/// Trains every member on the full dataset; members differ only in their seeds.
pub fn de_train<T: Real>(
    data: &LabeledDataset<T>,
    cfg: &DeepEnsembleConfig,
    seed: Seed,
) -> Result<EnsembleModel<T>> {
    if cfg.members < 2 {
        return Err(Error::Config(format!(
            "deep ensemble needs at least 2 members, got {}",
            cfg.members
        )));
    }
    if data.len() < MIN_ENSEMBLE_SAMPLES {
        return Err(Error::Config(format!(
            "deep ensemble needs at least {MIN_ENSEMBLE_SAMPLES} samples, got {}",
            data.len()
        )));
    }
    let spec = cfg.member_spec(data.input_dim(), data.output_dim());
    spec.validate()?;
    let scaler = minmax_fit(data.x.view())?;
    let xs = scaler.transform_matrix(data.x.view())?;
    let members = (0..cfg.members)
        .into_par_iter()
        .map(|i| {
            let s = seed.derive("de-member", i as u64);
            let net = mlp_init(&spec, s.derive("init", 0))?;
            let net = mlp_train(
                &net,
                xs.view(),
                data.y.view(),
                LossKind::Rmse,
                s.derive("train", 0),
            )?;
            Ok(EnsembleMember {
                scaler: scaler.clone(),
                net,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel { members })
}

impl<T: Real> EnsembleModel<T> {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

impl<T: Real> UncertaintyPredictor<T> for EnsembleModel<T> {
    fn input_dim(&self) -> usize {
        self.members[0].net.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.members[0].net.output_dim()
    }

    fn member_outputs(&self, x: ArrayView2<'_, T>) -> Result<Vec<Array2<T>>> {
        self.members
            .iter()
            .map(|m| {
                let xs = m.scaler.transform_matrix(x)?;
                m.net.forward(xs.view())
            })
            .collect()
    }
}
