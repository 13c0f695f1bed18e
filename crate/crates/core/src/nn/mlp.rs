use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::numcore::rng::uniform;
use crate::numcore::Seed;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
}

/// Architecture and training hyperparameters of a multilayer perceptron.
///
/// `val_fraction = 0` disables the validation split and early stopping; all
/// rows are then used for training and every epoch runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    #[serde(default)]
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub val_fraction: f64,
    pub patience: usize,
    #[serde(default)]
    pub l2: f64,
}

impl MlpSpec {
    /// Forward/inverse network configuration: five ReLU layers
    /// (64-128-256-128-64), Adam at 1e-3, 2000 epochs, batches of 32,
    /// 10% validation and early stopping with patience 10.
    pub fn tandem_default(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: vec![64, 128, 256, 128, 64],
            output_dim,
            activation: Activation::Relu,
            learning_rate: 1e-3,
            epochs: 2000,
            batch_size: 32,
            val_fraction: 0.1,
            patience: 10,
            l2: 0.0,
        }
    }

    pub fn with_dims(&self, input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("mlp spec: {m}")));
        if self.input_dim == 0 || self.output_dim == 0 {
            return bad("input and output dims must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layers must be a nonempty list of positive widths");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return bad("epochs, batch size and patience must be positive");
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad("val_fraction must lie in [0, 1)");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be nonnegative");
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every dense layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Dense layer computing `x · weights + bias`; `weights` is `fan_in × fan_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Layer<T: Real> {
    #[serde(with = "crate::model_io::flat_matrix")]
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub train: f64,
    pub val: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MlpModel<T: Real> {
    pub spec: MlpSpec,
    pub layers: Vec<Layer<T>>,
    #[serde(default)]
    pub loss_history: Vec<EpochLoss>,
    /// 1-based epoch whose weights were kept (best validation loss).
    #[serde(default)]
    pub best_epoch: Option<usize>,
}

/// Activations recorded during a forward pass: `acts[0]` is the input and
/// `acts[l + 1]` the output of layer `l`.
pub(crate) struct ForwardCache<T: Real> {
    pub acts: Vec<Array2<T>>,
}

/// Per-layer parameter gradients, same layout as [`MlpModel::layers`].
#[derive(Debug, Clone)]
pub struct Gradients<T: Real> {
    pub layers: Vec<(Array2<T>, Array1<T>)>,
}

impl<T: Real> Gradients<T> {
    pub fn flatten(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied().collect::<Vec<_>>())
            .collect()
    }
}

/// Glorot-uniform weights, `U(-s, s)` with `s = sqrt(6 / (fan_in + fan_out))`,
/// and zero biases.
pub fn mlp_init<T: Real>(spec: &MlpSpec, seed: Seed) -> Result<MlpModel<T>> {
    spec.validate()?;
    let mut rng = seed.rng();
    let layers = spec
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let s = T::lit((6.0 / (fan_in + fan_out) as f64).sqrt());
            let weights =
                Array2::from_shape_simple_fn((fan_in, fan_out), || uniform(&mut rng, -s, s));
            Layer {
                weights,
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(MlpModel {
        spec: spec.clone(),
        layers,
        loss_history: Vec::new(),
        best_epoch: None,
    })
}

impl<T: Real> MlpModel<T> {
    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Builds a model from explicit layers, checking that shapes chain.
    pub fn from_layers(spec: MlpSpec, layers: Vec<Layer<T>>) -> Result<Self> {
        let model = Self {
            spec,
            layers,
            loss_history: Vec::new(),
            best_epoch: None,
        };
        model.check_shapes()?;
        Ok(model)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let shapes = self.spec.layer_shapes();
        if shapes.len() != self.layers.len() {
            return Err(Error::Format(format!(
                "expected {} layers, found {}",
                shapes.len(),
                self.layers.len()
            )));
        }
        for (i, ((fi, fo), l)) in shapes.iter().zip(&self.layers).enumerate() {
            if l.weights.dim() != (*fi, *fo) || l.bias.len() != *fo {
                return Err(Error::Format(format!(
                    "layer {i}: expected {fi}x{fo}, found {:?} with bias {}",
                    l.weights.dim(),
                    l.bias.len()
                )));
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &ArrayView2<'_, T>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "mlp input",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// ReLU on hidden layers, identity on the output layer.
    pub fn forward(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check_input(&x)?;
        let last = self.layers.len() - 1;
        let mut h = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            h = h.dot(&layer.weights) + &layer.bias;
            if l < last {
                h.mapv_inplace(relu);
            }
        }
        Ok(h)
    }

    pub fn predict_one(&self, x: &[T]) -> Result<Vec<T>> {
        let row = ArrayView2::from_shape((1, x.len()), x).expect("contiguous slice");
        Ok(self.forward(row)?.into_raw_vec_and_offset().0)
    }

    pub(crate) fn forward_cached(&self, x: ArrayView2<'_, T>) -> ForwardCache<T> {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut h = acts[l].dot(&layer.weights) + &layer.bias;
            if l < last {
                h.mapv_inplace(relu);
            }
            acts.push(h);
        }
        ForwardCache { acts }
    }

    /// Backpropagates `grad_out` (dL/d output) through a cached pass.
    /// Returns parameter gradients (unless `params` is false) and dL/d input.
    pub(crate) fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_out: Array2<T>,
        params: bool,
    ) -> (Option<Gradients<T>>, Array2<T>) {
        let mut delta = grad_out;
        let mut grads = Vec::with_capacity(if params { self.layers.len() } else { 0 });
        for l in (0..self.layers.len()).rev() {
            if params {
                let gw = cache.acts[l].t().dot(&delta);
                let gb = delta.sum_axis(Axis(0));
                grads.push((gw, gb));
            }
            let mut prev = delta.dot(&self.layers[l].weights.t());
            if l > 0 {
                // derivative of ReLU, read off the post-activation
                ndarray::Zip::from(&mut prev)
                    .and(&cache.acts[l])
                    .for_each(|g, &a| {
                        if a <= T::zero() {
                            *g = T::zero();
                        }
                    });
            }
            delta = prev;
        }
        grads.reverse();
        (params.then_some(Gradients { layers: grads }), delta)
    }

    pub fn flat_parameters(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| {
                l.weights
                    .iter()
                    .chain(l.bias.iter())
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Overwrites parameters from the layout of [`Self::flat_parameters`].
    pub fn set_flat_parameters(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::Dimension {
                context: "flat parameters",
                expected: self.parameter_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.bias.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        Ok(())
    }
}

#[inline]
fn relu<T: Real>(v: T) -> T {
    if v > T::zero() {
        v
    } else {
        T::zero()
    }
}

/// Free-function form of [`MlpModel::forward`].
pub fn mlp_forward<T: Real>(m: &MlpModel<T>, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    m.forward(x)
}
