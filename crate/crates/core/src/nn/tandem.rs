//! Tandem forward/inverse network pair.
//!
//! The forward network learns `x -> y`; the inverse network learns `y -> x`
//! by minimizing the RMSE between `y` and `forward(inverse(y))` with the
//! forward network frozen. Both operate on min-max scaled data and share the
//! two scalers in swapped roles.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::mlp::{mlp_init, MlpModel, MlpSpec};
use super::train::{mlp_train, LossKind};
use crate::dataset::LabeledDataset;
use crate::numcore::{minmax_fit, ScalerParams, Seed};
use crate::{Error, Real, Result};

/// Minimum dataset size accepted by [`tandem_fit`].
pub const MIN_TANDEM_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TandemModel<T: Real> {
    pub forward_net: MlpModel<T>,
    pub inverse_net: MlpModel<T>,
    pub x_scaler: ScalerParams<T>,
    pub y_scaler: ScalerParams<T>,
    /// Units in which the composed inverse loss was measured; always `"scaled"`.
    #[serde(default = "scaled")]
    pub loss_space: String,
}

fn scaled() -> String {
    "scaled".to_owned()
}

pub fn tandem_fit<T: Real>(
    data: &LabeledDataset<T>,
    spec: &MlpSpec,
    seed: Seed,
) -> Result<TandemModel<T>> {
    if data.len() < MIN_TANDEM_SAMPLES {
        return Err(Error::Config(format!(
            "tandem training needs at least {MIN_TANDEM_SAMPLES} samples, got {}",
            data.len()
        )));
    }
    let (d, p) = (data.input_dim(), data.output_dim());
    let x_scaler = minmax_fit(data.x.view())?;
    let y_scaler = minmax_fit(data.y.view())?;
    let xs = x_scaler.transform_matrix(data.x.view())?;
    let ys = y_scaler.transform_matrix(data.y.view())?;

    let fspec = spec.with_dims(d, p);
    let forward = mlp_init(&fspec, seed.derive("forward-init", 0))?;
    let forward = mlp_train(
        &forward,
        xs.view(),
        ys.view(),
        LossKind::Rmse,
        seed.derive("forward-train", 0),
    )?;

    let ispec = spec.with_dims(p, d);
    let inverse = mlp_init(&ispec, seed.derive("inverse-init", 0))?;
    let inverse = mlp_train(
        &inverse,
        ys.view(),
        ys.view(),
        LossKind::Tandem { forward: &forward },
        seed.derive("inverse-train", 0),
    )?;

    Ok(TandemModel {
        forward_net: forward,
        inverse_net: inverse,
        x_scaler,
        y_scaler,
        loss_space: scaled(),
    })
}

impl<T: Real> TandemModel<T> {
    pub fn design_dim(&self) -> usize {
        self.x_scaler.dim()
    }

    pub fn response_dim(&self) -> usize {
        self.y_scaler.dim()
    }

    /// Inverse prediction for a batch of targets (rows), in problem units.
    pub fn predict_designs(&self, y: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let ys = self.y_scaler.transform_matrix(y)?;
        let xs = self.inverse_net.forward(ys.view())?;
        self.x_scaler.inverse_matrix(xs.view())
    }

    /// Forward-network prediction in problem units.
    pub fn predict_responses(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let xs = self.x_scaler.transform_matrix(x)?;
        let ys = self.forward_net.forward(xs.view())?;
        self.y_scaler.inverse_matrix(ys.view())
    }
}

/// Scales `y`, runs the inverse network and unscales the design.
pub fn tandem_predict_design<T: Real>(t: &TandemModel<T>, y: &[T]) -> Result<Vec<T>> {
    let ys = t.y_scaler.transform(y)?;
    let xs = t.inverse_net.predict_one(&ys)?;
    t.x_scaler.inverse(&xs)
}
