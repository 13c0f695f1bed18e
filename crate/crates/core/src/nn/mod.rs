//! Feed-forward networks, Adam training, and tandem inverse models.

mod adam;
mod mlp;
mod tandem;
mod train;

pub use mlp::{mlp_forward, mlp_init, Activation, EpochLoss, Gradients, Layer, MlpModel, MlpSpec};
pub use tandem::{tandem_fit, tandem_predict_design, TandemModel, MIN_TANDEM_SAMPLES};
pub use train::{
    evaluate_loss, loss_and_gradients, mlp_train, EarlyStopping, LossKind, StopSignal,
    MIN_IMPROVEMENT,
};
