//! Bootstrap regression forest with exhaustive variance-reduction splits.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::UncertaintyPredictor;
use crate::numcore::rng::{permutation, StreamRng};
use crate::numcore::Seed;
use crate::{Error, LabeledDataset, Real, Result};

pub const MIN_FOREST_SAMPLES: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub trees: usize,
    /// Fit each tree on a with-replacement resample of the data.
    pub bootstrap: bool,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 150,
            bootstrap: true,
            max_features: None,
        }
    }
}

/// Binary tree in parallel-array form. Node `0` is the root; for an internal
/// node `feature[k] >= 0`, rows with `x[feature] <= threshold[k]` go to
/// `left[k]`, others to `right[k]`. Leaves have `feature[k] = -1`.
/// `value[k * output_dim .. (k + 1) * output_dim]` is the mean response of the
/// training rows reaching node `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RegressionTree<T: Real> {
    pub output_dim: usize,
    pub feature: Vec<i32>,
    pub threshold: Vec<T>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub value: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ForestModel<T: Real> {
    pub input_dim: usize,
    pub trees: Vec<RegressionTree<T>>,
}

struct Split<T> {
    feature: usize,
    threshold: T,
    /// rows sent left, in sorted order
    left: Vec<usize>,
    right: Vec<usize>,
}

impl<T: Real> RegressionTree<T> {
    fn push_node(&mut self, mean: &[T]) -> usize {
        self.feature.push(-1);
        self.threshold.push(T::zero());
        self.left.push(0);
        self.right.push(0);
        self.value.extend_from_slice(mean);
        self.feature.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.feature.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.feature.iter().filter(|&&f| f < 0).count()
    }

    pub fn root_split(&self) -> Option<(usize, T)> {
        (self.feature[0] >= 0).then(|| (self.feature[0] as usize, self.threshold[0]))
    }

    pub fn predict(&self, x: &[T]) -> &[T] {
        let mut k = 0;
        while self.feature[k] >= 0 {
            k = if x[self.feature[k] as usize] <= self.threshold[k] {
                self.left[k] as usize
            } else {
                self.right[k] as usize
            };
        }
        &self.value[k * self.output_dim..(k + 1) * self.output_dim]
    }

    /// Grows a tree on `rows` (indices into `x`/`y`, repeats allowed) until
    /// every leaf is pure or its inputs are identical.
    fn grow(
        x: &Array2<T>,
        y: &Array2<T>,
        rows: Vec<usize>,
        max_features: usize,
        rng: &mut StreamRng,
    ) -> Self {
        let p = y.ncols();
        let mut tree = Self {
            output_dim: p,
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            value: Vec::new(),
        };
        let root = tree.push_node(&mean_row(y, &rows));
        let mut stack = vec![(root, rows)];
        while let Some((node, rows)) = stack.pop() {
            if is_pure(y, &rows) {
                continue;
            }
            let Some(split) = best_split(x, y, &rows, max_features, rng) else {
                continue;
            };
            let l = tree.push_node(&mean_row(y, &split.left));
            let r = tree.push_node(&mean_row(y, &split.right));
            tree.feature[node] = split.feature as i32;
            tree.threshold[node] = split.threshold;
            tree.left[node] = l as u32;
            tree.right[node] = r as u32;
            stack.push((r, split.right));
            stack.push((l, split.left));
        }
        tree
    }
}

fn mean_row<T: Real>(y: &Array2<T>, rows: &[usize]) -> Vec<T> {
    let mut m = vec![T::zero(); y.ncols()];
    for &i in rows {
        for (acc, &v) in m.iter_mut().zip(y.row(i)) {
            *acc += v;
        }
    }
    let n = T::from_usize_lossy(rows.len());
    m.iter_mut().for_each(|v| *v /= n);
    m
}

fn is_pure<T: Real>(y: &Array2<T>, rows: &[usize]) -> bool {
    let first = y.row(rows[0]);
    rows[1..].iter().all(|&i| y.row(i) == first)
}

fn cmp<T: Real>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Exhaustive scan over midpoints between consecutive distinct feature
/// values. Maximizes `|S_L|²/n_L + |S_R|²/n_R`, which is equivalent to
/// minimizing the summed within-child squared error over all outputs.
fn best_split<T: Real>(
    x: &Array2<T>,
    y: &Array2<T>,
    rows: &[usize],
    max_features: usize,
    rng: &mut StreamRng,
) -> Option<Split<T>> {
    let p = y.ncols();
    let n = rows.len();
    let mut total = vec![T::zero(); p];
    for &i in rows {
        for (t, &v) in total.iter_mut().zip(y.row(i)) {
            *t += v;
        }
    }
    let features: Vec<usize> = if max_features >= x.ncols() {
        // visit order is still randomized so ties are broken by the stream
        permutation(rng, x.ncols())
    } else {
        permutation(rng, x.ncols())
            .into_iter()
            .take(max_features)
            .collect()
    };

    let mut best: Option<(T, usize, usize)> = None;
    let mut sorted = rows.to_vec();
    let mut left_sum = vec![T::zero(); p];
    for &f in &features {
        sorted.copy_from_slice(rows);
        sorted.sort_by(|&a, &b| cmp(x[[a, f]], x[[b, f]]));
        left_sum.iter_mut().for_each(|v| *v = T::zero());
        for k in 0..n - 1 {
            for (s, &v) in left_sum.iter_mut().zip(y.row(sorted[k])) {
                *s += v;
            }
            let (a, b) = (x[[sorted[k], f]], x[[sorted[k + 1], f]]);
            if !(a < b) {
                continue;
            }
            let nl = T::from_usize_lossy(k + 1);
            let nr = T::from_usize_lossy(n - k - 1);
            let mut sl = T::zero();
            let mut sr = T::zero();
            for (&l, &t) in left_sum.iter().zip(&total) {
                sl += l * l;
                sr += (t - l) * (t - l);
            }
            let score = sl / nl + sr / nr;
            if best.as_ref().is_none_or(|(s, ..)| score > *s) {
                best = Some((score, f, k));
            }
        }
    }
    let (_, feature, k) = best?;
    let mut order = rows.to_vec();
    order.sort_by(|&a, &b| cmp(x[[a, feature]], x[[b, feature]]));
    let (a, b) = (x[[order[k], feature]], x[[order[k + 1], feature]]);
    let mut threshold = (a + b) / T::lit(2.0);
    if threshold >= b {
        threshold = a;
    }
    Some(Split {
        feature,
        threshold,
        left: order[..=k].to_vec(),
        right: order[k + 1..].to_vec(),
    })
}

pub fn forest_train<T: Real>(
    data: &LabeledDataset<T>,
    cfg: &ForestConfig,
    seed: Seed,
) -> Result<ForestModel<T>> {
    if cfg.trees < 2 {
        return Err(Error::Config(format!(
            "forest needs at least 2 trees, got {}",
            cfg.trees
        )));
    }
    if data.len() < MIN_FOREST_SAMPLES {
        return Err(Error::Empty("forest training data"));
    }
    let n = data.len();
    let max_features = cfg.max_features.unwrap_or(data.input_dim()).max(1);
    let trees = (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive("tree", t as u64).rng();
            let rows = if cfg.bootstrap {
                bootstrap_rows(&mut rng, n)
            } else {
                (0..n).collect()
            };
            RegressionTree::grow(&data.x, &data.y, rows, max_features, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        input_dim: data.input_dim(),
        trees,
    })
}

/// `n` indices drawn uniformly with replacement.
pub(crate) fn bootstrap_rows<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

impl<T: Real> ForestModel<T> {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

impl<T: Real> UncertaintyPredictor<T> for ForestModel<T> {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.trees[0].output_dim
    }

    fn member_outputs(&self, x: ArrayView2<'_, T>) -> Result<Vec<Array2<T>>> {
        if x.ncols() != self.input_dim {
            return Err(Error::Dimension {
                context: "forest input",
                expected: self.input_dim,
                got: x.ncols(),
            });
        }
        let p = self.output_dim();
        Ok(self
            .trees
            .iter()
            .map(|tree| {
                let mut out = Array2::zeros((x.nrows(), p));
                for (i, row) in x.rows().into_iter().enumerate() {
                    let row = row.to_vec();
                    out.row_mut(i)
                        .iter_mut()
                        .zip(tree.predict(&row))
                        .for_each(|(o, &v)| *o = v);
                }
                out
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn step_fixture() -> LabeledDataset<f64> {
        // 25 points on each side of zero
        let xs: Vec<f64> = (0..50)
            .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 50.0)
            .collect();
        let x = Array2::from_shape_vec((50, 1), xs.clone()).unwrap();
        let y = Array2::from_shape_fn((50, 1), |(i, _)| if xs[i] < 0.0 { 0.0 } else { 10.0 });
        LabeledDataset::new(x, y).unwrap()
    }

    /// Independent brute force: SSE of every candidate threshold.
    fn brute_force_threshold(x: &[f64], y: &[f64]) -> f64 {
        let mut u = x.to_vec();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        u.dedup();
        let mut best = (f64::INFINITY, 0.0);
        for w in u.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let sse = |keep: &dyn Fn(f64) -> bool| {
                let v: Vec<f64> = x
                    .iter()
                    .zip(y)
                    .filter(|(a, _)| keep(**a))
                    .map(|(_, b)| *b)
                    .collect();
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|b| (b - m) * (b - m)).sum::<f64>()
            };
            let s = sse(&|a| a <= t) + sse(&|a| a > t);
            if s < best.0 {
                best = (s, t);
            }
        }
        best.1
    }

    #[test]
    fn default_tree_count() {
        assert_eq!(ForestConfig::default().trees, 150);
        let f = forest_train(&step_fixture(), &ForestConfig::default(), Seed(0)).unwrap();
        assert_eq!(f.tree_count(), 150);
    }

    #[test]
    fn step_function_root_split() {
        let d = step_fixture();
        let xs: Vec<f64> = d.x.column(0).to_vec();
        let ys: Vec<f64> = d.y.column(0).to_vec();
        let oracle = brute_force_threshold(&xs, &ys);
        assert!(oracle.abs() < 0.05);
        let f = forest_train(
            &d,
            &ForestConfig {
                trees: 20,
                ..Default::default()
            },
            Seed(4),
        )
        .unwrap();
        for tree in &f.trees {
            let (feat, thr) = tree.root_split().unwrap();
            assert_eq!(feat, 0);
            assert!(thr.abs() < 0.1, "root threshold {thr}");
        }
        let (left, _) = f.predict_mean_std(&[-0.5]).unwrap();
        let (right, _) = f.predict_mean_std(&[0.5]).unwrap();
        assert!(left[0].abs() < 0.5 && (right[0] - 10.0).abs() < 0.5);
    }

    #[test]
    fn no_bootstrap_reproduces_training_points() {
        let x = Array2::from_shape_fn((30, 3), |(i, j)| {
            ((i * 7 + j * 13) % 31) as f64 + 0.1 * j as f64
        });
        let y = Array2::from_shape_fn((30, 2), |(i, j)| ((i * i + j) % 5) as f64 - x[[i, 2]]);
        let d = LabeledDataset::new(x, y).unwrap();
        let cfg = ForestConfig {
            trees: 3,
            bootstrap: false,
            max_features: None,
        };
        let f = forest_train(&d, &cfg, Seed(0)).unwrap();
        for i in 0..d.len() {
            let (m, s) = f.predict_mean_std(&d.x.row(i).to_vec()).unwrap();
            for (a, b) in m.iter().zip(d.y.row(i)) {
                assert!((a - b).abs() < 1e-12);
            }
            // every tree stores the exact target in its leaf
            for t in &f.trees {
                assert_eq!(
                    t.predict(&d.x.row(i).to_vec()),
                    d.y.row(i).to_vec().as_slice()
                );
            }
            assert!(s.iter().all(|&v| v < 1e-12));
        }
    }

    #[test]
    fn single_sample_gives_constant_trees() {
        let d = LabeledDataset::new(
            Array2::from_elem((1, 2), 0.5),
            Array2::from_shape_vec((1, 2), vec![3.0, -1.0]).unwrap(),
        )
        .unwrap();
        let f = forest_train(
            &d,
            &ForestConfig {
                trees: 5,
                ..Default::default()
            },
            Seed(1),
        )
        .unwrap();
        for x in [[0.0, 0.0], [9.0, -3.0]] {
            let (m, s) = f.predict_mean_std(&x).unwrap();
            assert_eq!(m, vec![3.0, -1.0]);
            assert_eq!(s, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn duplicate_inputs_make_leaves() {
        let x = Array2::from_elem((6, 1), 1.0);
        let y = Array2::from_shape_fn((6, 1), |(i, _)| i as f64);
        let d = LabeledDataset::new(x, y).unwrap();
        let f = forest_train(
            &d,
            &ForestConfig {
                trees: 2,
                bootstrap: false,
                max_features: None,
            },
            Seed(0),
        )
        .unwrap();
        assert_eq!(f.trees[0].node_count(), 1);
        assert_eq!(f.predict_mean_std(&[1.0]).unwrap().0, vec![2.5]);
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let a = bootstrap_rows(&mut Seed(5).rng(), 40);
        let b = bootstrap_rows(&mut Seed(5).rng(), 40);
        assert_eq!(a, b);
        assert!(a.iter().all(|&i| i < 40));
        let d = step_fixture();
        let cfg = ForestConfig {
            trees: 4,
            ..Default::default()
        };
        assert_eq!(
            forest_train(&d, &cfg, Seed(2)).unwrap(),
            forest_train(&d, &cfg, Seed(2)).unwrap()
        );
    }

    #[test]
    fn rejects_single_tree() {
        assert!(forest_train(
            &step_fixture(),
            &ForestConfig {
                trees: 1,
                ..Default::default()
            },
            Seed(0)
        )
        .is_err());
    }
}
