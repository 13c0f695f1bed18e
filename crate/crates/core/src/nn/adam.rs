use ndarray::{Array1, Array2, Zip};

use super::mlp::{Gradients, Layer};
use crate::Real;

/// Adam with bias correction; β1 = 0.9, β2 = 0.999, ε = 1e-8.
pub(crate) struct Adam<T: Real> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    step: i32,
    first: Vec<(Array2<T>, Array1<T>)>,
    second: Vec<(Array2<T>, Array1<T>)>,
}

impl<T: Real> Adam<T> {
    pub fn new(layers: &[Layer<T>], lr: f64) -> Self {
        let zeros = || {
            layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weights.raw_dim()),
                        Array1::zeros(l.bias.raw_dim()),
                    )
                })
                .collect::<Vec<_>>()
        };
        Self {
            lr: T::lit(lr),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn update(&mut self, layers: &mut [Layer<T>], grads: &Gradients<T>) {
        self.step += 1;
        let one = T::one();
        let c1 = one - self.beta1.powi(self.step);
        let c2 = one - self.beta2.powi(self.step);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let rate = self.lr * c2.sqrt() / c1;
        // eps scaled so that the update equals lr * m_hat / (sqrt(v_hat) + eps)
        let eps_hat = eps * c2.sqrt();
        for (((layer, (gw, gb)), (mw, mb)), (vw, vb)) in layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            Zip::from(&mut layer.weights)
                .and(gw)
                .and(mw)
                .and(vw)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *p -= rate * *m / (v.sqrt() + eps_hat);
                });
            Zip::from(&mut layer.bias)
                .and(gb)
                .and(mb)
                .and(vb)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    *p -= rate * *m / (v.sqrt() + eps_hat);
                });
        }
    }
}
