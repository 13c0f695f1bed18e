//! Forward models with predictive uncertainty, used to drive acquisition.

mod ensemble;
mod forest;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

pub use ensemble::{de_train, DeepEnsembleConfig, EnsembleMember, EnsembleModel};
pub use forest::{forest_train, ForestConfig, ForestModel, RegressionTree};

use crate::numcore::{mean_std_columns, Seed};
use crate::{Error, LabeledDataset, Real, Result};

/// A model made of several predictors whose spread measures uncertainty.
pub trait UncertaintyPredictor<T: Real>: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// Predictions of every member for every row: `members × (n × p)`.
    fn member_outputs(&self, x: ArrayView2<'_, T>) -> Result<Vec<Array2<T>>>;

    /// Per-output mean and population standard deviation across members.
    fn predict_mean_std(&self, x: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                context: "uncertainty model input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let row = ArrayView2::from_shape((1, x.len()), x).expect("contiguous slice");
        let rows: Vec<Vec<T>> = self
            .member_outputs(row)?
            .into_iter()
            .map(|m| m.row(0).to_vec())
            .collect();
        Ok(mean_std_columns(&rows))
    }

    /// Sum of the per-output standard deviations at `x`.
    fn total_uncertainty(&self, x: &[T]) -> Result<T> {
        Ok(self.predict_mean_std(x)?.1.into_iter().sum())
    }

    /// Member-mean prediction for each row of `x`.
    fn predict_mean(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "uncertainty model input",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let outs = self.member_outputs(x)?;
        let mut mean = Array2::zeros((x.nrows(), self.output_dim()));
        for o in &outs {
            mean += o;
        }
        Ok(mean / T::from_usize_lossy(outs.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "")]
pub enum UncertaintyModel<T: Real> {
    Ensemble(EnsembleModel<T>),
    Forest(ForestModel<T>),
}

impl<T: Real> UncertaintyPredictor<T> for UncertaintyModel<T> {
    fn input_dim(&self) -> usize {
        match self {
            Self::Ensemble(m) => m.input_dim(),
            Self::Forest(m) => m.input_dim(),
        }
    }

    fn output_dim(&self) -> usize {
        match self {
            Self::Ensemble(m) => m.output_dim(),
            Self::Forest(m) => m.output_dim(),
        }
    }

    fn member_outputs(&self, x: ArrayView2<'_, T>) -> Result<Vec<Array2<T>>> {
        match self {
            Self::Ensemble(m) => m.member_outputs(x),
            Self::Forest(m) => m.member_outputs(x),
        }
    }
}

/// Which uncertainty model to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Forest(ForestConfig),
    DeepEnsemble(DeepEnsembleConfig),
}

impl ModelKind {
    pub fn forest() -> Self {
        Self::Forest(ForestConfig::default())
    }

    pub fn deep_ensemble() -> Self {
        Self::DeepEnsemble(DeepEnsembleConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Forest(_) => "forest",
            Self::DeepEnsemble(_) => "deep_ensemble",
        }
    }

    pub fn train<T: Real>(
        &self,
        data: &LabeledDataset<T>,
        seed: Seed,
    ) -> Result<UncertaintyModel<T>> {
        Ok(match self {
            Self::Forest(cfg) => UncertaintyModel::Forest(forest_train(data, cfg, seed)?),
            Self::DeepEnsemble(cfg) => UncertaintyModel::Ensemble(de_train(data, cfg, seed)?),
        })
    }
}

/// Free-function form of [`UncertaintyPredictor::predict_mean_std`].
pub fn predict_mean_std<T: Real, M: UncertaintyPredictor<T> + ?Sized>(
    model: &M,
    x: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    model.predict_mean_std(x)
}

/// Free-function form of [`UncertaintyPredictor::total_uncertainty`].
pub fn total_uncertainty<T: Real, M: UncertaintyPredictor<T> + ?Sized>(
    model: &M,
    x: &[T],
) -> Result<T> {
    model.total_uncertainty(x)
}
