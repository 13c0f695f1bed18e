//! Mini-batch Adam training with a held-out validation split and early stopping.

use ndarray::{Array2, ArrayView2, Axis};

use super::adam::Adam;
use super::mlp::{EpochLoss, Gradients, MlpModel};
use crate::numcore::rng::permutation;
use crate::numcore::Seed;
use crate::{Error, Real, Result};

/// Absolute amount by which validation loss must drop to count as progress.
pub const MIN_IMPROVEMENT: f64 = 1e-6;

/// Objective minimized by [`mlp_train`].
#[derive(Debug, Clone, Copy)]
pub enum LossKind<'a, T: Real> {
    /// RMSE between the network output and the target rows.
    Rmse,
    /// RMSE between the target rows and `forward(model(x))`; `forward` is
    /// frozen and only the trained model's parameters move.
    Tandem { forward: &'a MlpModel<T> },
}

/// RMSE over all entries and its gradient with respect to `pred`.
fn rmse_with_grad<T: Real>(pred: &Array2<T>, target: ArrayView2<'_, T>) -> (T, Array2<T>) {
    let mut diff = pred - &target;
    let count = T::from_usize_lossy(diff.len());
    let loss = (diff.iter().map(|&d| d * d).sum::<T>() / count).sqrt();
    if loss > T::zero() {
        let scale = T::one() / (count * loss);
        diff.mapv_inplace(|d| d * scale);
    } else {
        diff.fill(T::zero());
    }
    (loss, diff)
}

fn check_loss_shapes<T: Real>(
    model: &MlpModel<T>,
    x: &ArrayView2<'_, T>,
    y: &ArrayView2<'_, T>,
    loss: &LossKind<'_, T>,
) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::Dimension {
            context: "training rows",
            expected: x.nrows(),
            got: y.nrows(),
        });
    }
    if x.ncols() != model.input_dim() {
        return Err(Error::Dimension {
            context: "training inputs",
            expected: model.input_dim(),
            got: x.ncols(),
        });
    }
    let target_dim = match loss {
        LossKind::Rmse => model.output_dim(),
        LossKind::Tandem { forward } => {
            if forward.input_dim() != model.output_dim() {
                return Err(Error::Dimension {
                    context: "tandem forward input",
                    expected: model.output_dim(),
                    got: forward.input_dim(),
                });
            }
            forward.output_dim()
        }
    };
    if y.ncols() != target_dim {
        return Err(Error::Dimension {
            context: "training targets",
            expected: target_dim,
            got: y.ncols(),
        });
    }
    Ok(())
}

fn data_loss_and_grads<T: Real>(
    model: &MlpModel<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    loss: &LossKind<'_, T>,
) -> (T, Gradients<T>) {
    let cache = model.forward_cached(x);
    let out = cache.acts.last().expect("at least one layer");
    let (value, grad_out) = match loss {
        LossKind::Rmse => rmse_with_grad(out, y),
        LossKind::Tandem { forward } => {
            let fcache = forward.forward_cached(out.view());
            let (value, g) = rmse_with_grad(fcache.acts.last().expect("layers"), y);
            let (_, g_in) = forward.backward(&fcache, g, false);
            (value, g_in)
        }
    };
    let (grads, _) = model.backward(&cache, grad_out, true);
    (value, grads.expect("parameter gradients requested"))
}

/// Adds the L2 gradient in place and returns the penalty value.
fn add_l2<T: Real>(model: &MlpModel<T>, grads: &mut Gradients<T>, batch: usize) -> T {
    if model.spec.l2 <= 0.0 {
        return T::zero();
    }
    let coef = T::lit(model.spec.l2) / T::from_usize_lossy(batch);
    let mut penalty = T::zero();
    for (layer, (gw, _)) in model.layers.iter().zip(&mut grads.layers) {
        penalty += coef * T::lit(0.5) * layer.weights.iter().map(|&w| w * w).sum::<T>();
        gw.scaled_add(coef, &layer.weights);
    }
    penalty
}

/// Objective value and parameter gradients on a batch, including the L2
/// penalty `0.5 · l2 · Σ‖W‖² / n` on weight matrices (biases excluded).
pub fn loss_and_gradients<T: Real>(
    model: &MlpModel<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    loss: LossKind<'_, T>,
) -> Result<(T, Gradients<T>)> {
    check_loss_shapes(model, &x, &y, &loss)?;
    if x.nrows() == 0 {
        return Err(Error::Empty("training batch"));
    }
    let (mut value, mut grads) = data_loss_and_grads(model, x, y, &loss);
    value += add_l2(model, &mut grads, x.nrows());
    Ok((value, grads))
}

/// Data loss (no L2 term) of `model` on `(x, y)`.
pub fn evaluate_loss<T: Real>(
    model: &MlpModel<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    loss: LossKind<'_, T>,
) -> Result<T> {
    check_loss_shapes(model, &x, &y, &loss)?;
    let out = model.forward(x)?;
    let pred = match loss {
        LossKind::Rmse => out,
        LossKind::Tandem { forward } => forward.forward(out.view())?,
    };
    Ok(rmse_with_grad(&pred, y).0)
}

/// Patience-based early stopping on validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopSignal {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> StopSignal {
        if val_loss < self.best - MIN_IMPROVEMENT {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            StopSignal::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                StopSignal::Stop
            } else {
                StopSignal::Continue
            }
        }
    }
}

/// Trains a copy of `model` and returns it.
///
/// Rows are shuffled once with the stream of `seed`; the last
/// `val_fraction` of them form the validation set. Each epoch reshuffles the
/// training rows into mini-batches. With a validation set the weights of the
/// best validation epoch are restored at the end.
pub fn mlp_train<T: Real>(
    model: &MlpModel<T>,
    x: ArrayView2<'_, T>,
    y: ArrayView2<'_, T>,
    loss: LossKind<'_, T>,
    seed: Seed,
) -> Result<MlpModel<T>> {
    model.spec.validate()?;
    check_loss_shapes(model, &x, &y, &loss)?;
    let spec = &model.spec;
    let n = x.nrows();
    let mut rng = seed.rng();
    let order = permutation(&mut rng, n);
    let n_val = if spec.val_fraction > 0.0 {
        ((n as f64 * spec.val_fraction).round() as usize).max(1)
    } else {
        0
    };
    let n_train = n.saturating_sub(n_val);
    if n_train < 2 || n_val >= n {
        return Err(Error::Config(format!(
            "{n} samples leave {n_train} for training after a {n_val}-row validation split"
        )));
    }
    let (train_idx, val_idx) = order.split_at(n_train);
    let xt = x.select(Axis(0), train_idx);
    let yt = y.select(Axis(0), train_idx);
    let val = (n_val > 0).then(|| (x.select(Axis(0), val_idx), y.select(Axis(0), val_idx)));

    let batch = spec.batch_size.min(n_train);
    let mut trained = model.clone();
    trained.loss_history.clear();
    trained.best_epoch = None;
    let mut adam = Adam::new(&trained.layers, spec.learning_rate);
    let mut stopper = EarlyStopping::new(spec.patience);
    let mut best_layers = None;

    for epoch in 1..=spec.epochs {
        let shuffled = permutation(&mut rng, n_train);
        let mut weighted = 0.0;
        for chunk in shuffled.chunks(batch) {
            let xb = xt.select(Axis(0), chunk);
            let yb = yt.select(Axis(0), chunk);
            let (value, mut grads) = data_loss_and_grads(&trained, xb.view(), yb.view(), &loss);
            let value = value.as_f64();
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
            }
            add_l2(&trained, &mut grads, chunk.len());
            adam.update(&mut trained.layers, &grads);
            weighted += value * chunk.len() as f64;
        }
        let train_loss = weighted / n_train as f64;

        let Some((xv, yv)) = &val else {
            trained.loss_history.push(EpochLoss {
                train: train_loss,
                val: None,
            });
            continue;
        };
        let val_loss = evaluate_loss(&trained, xv.view(), yv.view(), loss)?.as_f64();
        if !val_loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "validation loss at epoch {epoch}"
            )));
        }
        trained.loss_history.push(EpochLoss {
            train: train_loss,
            val: Some(val_loss),
        });
        match stopper.observe(epoch, val_loss) {
            StopSignal::Improved => best_layers = Some(trained.layers.clone()),
            StopSignal::Continue => {}
            StopSignal::Stop => break,
        }
    }

    if let Some(layers) = best_layers {
        trained.layers = layers;
        trained.best_epoch = Some(stopper.best_epoch());
    }
    Ok(trained)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::{mlp_init, MlpSpec};
    use ndarray::{array, Array2};

    fn small_spec(input: usize, hidden: Vec<usize>, output: usize) -> MlpSpec {
        MlpSpec {
            hidden,
            epochs: 200,
            batch_size: 16,
            ..MlpSpec::tandem_default(input, output)
        }
    }

    #[test]
    fn early_stopping_on_increasing_loss() {
        let mut es = EarlyStopping::new(10);
        let mut stopped = None;
        for epoch in 1..=100 {
            if es.observe(epoch, epoch as f64) == StopSignal::Stop {
                stopped = Some(epoch);
                break;
            }
        }
        assert_eq!(stopped, Some(11));
        assert_eq!(es.best_epoch(), 1);
    }

    #[test]
    fn tiny_improvements_do_not_count() {
        let mut es = EarlyStopping::new(2);
        assert_eq!(es.observe(1, 1.0), StopSignal::Improved);
        assert_eq!(es.observe(2, 1.0 - 1e-7), StopSignal::Continue);
        assert_eq!(es.observe(3, 1.0 - 2e-7), StopSignal::Stop);
    }

    #[test]
    fn rmse_gradient_zero_at_exact_fit() {
        let p = array![[1.0, 2.0]];
        let (l, g) = rmse_with_grad(&p, p.view());
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_few_samples() {
        let m = mlp_init::<f64>(&small_spec(1, vec![4], 1), Seed(0)).unwrap();
        let x = array![[0.0], [1.0]];
        let err = mlp_train(&m, x.view(), x.view(), LossKind::Rmse, Seed(1));
        assert!(err.is_err());
    }

    #[test]
    fn fits_linear_target() {
        let n = 200;
        let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64 / (n - 1) as f64);
        let y = x.mapv(|v| 2.0 * v);
        let m = mlp_init::<f64>(&small_spec(1, vec![16], 1), Seed(3)).unwrap();
        let t = mlp_train(&m, x.view(), y.view(), LossKind::Rmse, Seed(4)).unwrap();
        let r = evaluate_loss(&t, x.view(), y.view(), LossKind::Rmse).unwrap();
        // targets span [0, 2]; compare in scaled units
        assert!(r / 2.0 < 0.05, "train rmse {r}");
    }

    #[test]
    fn restores_best_validation_weights() {
        let n = 60;
        let x = Array2::from_shape_fn((n, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 10.0);
        let y = Array2::from_shape_fn((n, 1), |(i, _)| (x[[i, 0]] - x[[i, 1]]).sin());
        let mut spec = small_spec(2, vec![8], 1);
        spec.patience = 3;
        let m = mlp_init::<f64>(&spec, Seed(5)).unwrap();
        let t = mlp_train(&m, x.view(), y.view(), LossKind::Rmse, Seed(6)).unwrap();
        let best = t.best_epoch.unwrap();
        let min_val = t
            .loss_history
            .iter()
            .map(|e| e.val.unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(t.loss_history[best - 1].val.unwrap(), min_val);

        // recompute the validation split and check the restored weights score the minimum
        let mut rng = Seed(6).rng();
        let order = permutation(&mut rng, n);
        let val_idx = &order[n - 6..];
        let xv = x.select(Axis(0), val_idx);
        let yv = y.select(Axis(0), val_idx);
        let v = evaluate_loss(&t, xv.view(), yv.view(), LossKind::Rmse).unwrap();
        assert_eq!(v, min_val);
    }

    #[test]
    fn tandem_shape_checks() {
        let inv = mlp_init::<f64>(&small_spec(3, vec![4], 2), Seed(0)).unwrap();
        let bad_fwd = mlp_init::<f64>(&small_spec(4, vec![4], 3), Seed(0)).unwrap();
        let y = Array2::<f64>::zeros((10, 3));
        assert!(mlp_train(
            &inv,
            y.view(),
            y.view(),
            LossKind::Tandem { forward: &bad_fwd },
            Seed(0)
        )
        .is_err());
    }
}
