//! Batch active learning for multi-output regression.
//!
//! Starting from a Latin hypercube design of `n0` labeled points, each round
//! runs `k` independently seeded PSO searches for the designs of maximum
//! total predictive uncertainty, labels them with the high-fidelity function,
//! appends them and retrains the uncertainty model from scratch, until the
//! evaluation budget `n_max` is spent.

use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pso::{pso_maximize, PsoConfig};
use crate::numcore::{BoundsBox, Seed};
use crate::samplers::lhs_sample;
use crate::surrogates::{ModelKind, UncertaintyModel, UncertaintyPredictor};
use crate::{Error, LabeledDataset, Real, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALConfig {
    pub n0: usize,
    pub k: usize,
    pub n_max: usize,
    pub pso: PsoConfig,
    pub model_kind: ModelKind,
}

impl ALConfig {
    /// `n0 = 20`, `k = 5`, default PSO.
    pub fn new(n_max: usize, model_kind: ModelKind) -> Self {
        Self {
            n0: 20,
            k: 5,
            n_max,
            pso: PsoConfig::default(),
            model_kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 < 2 || self.k < 1 || self.n_max < self.n0 {
            return Err(Error::Config(format!(
                "active learning needs n0 >= 2, k >= 1, n_max >= n0 (got n0={}, k={}, n_max={})",
                self.n0, self.k, self.n_max
            )));
        }
        if (self.n_max - self.n0) % self.k != 0 {
            return Err(Error::Config(format!(
                "n_max - n0 = {} is not a multiple of k = {}",
                self.n_max - self.n0,
                self.k
            )));
        }
        self.pso.validate()
    }

    pub fn rounds(&self) -> usize {
        (self.n_max - self.n0) / self.k
    }
}

/// Anything that can fit an uncertainty model from scratch.
pub trait SurrogateTrainer<T: Real>: Sync {
    type Model: UncertaintyPredictor<T>;
    fn train(&self, data: &LabeledDataset<T>, seed: Seed) -> Result<Self::Model>;
}

impl<T: Real> SurrogateTrainer<T> for ModelKind {
    type Model = UncertaintyModel<T>;

    fn train(&self, data: &LabeledDataset<T>, seed: Seed) -> Result<Self::Model> {
        ModelKind::train(self, data, seed)
    }
}

/// One acquisition round: the batch, its uncertainty values and the seeds
/// of the PSO runs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub points: Vec<Vec<f64>>,
    pub uncertainty: Vec<f64>,
    pub pso_seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ALOutcome<T: Real, M> {
    pub dataset: LabeledDataset<T>,
    pub model: M,
    pub trace: Vec<RoundTrace>,
    pub evaluations: usize,
}

impl<T: Real, M> ALOutcome<T, M> {
    pub fn write_trace_jsonl<W: Write>(&self, w: W) -> Result<()> {
        write_trace_jsonl(&self.trace, w)
    }
}

/// One JSON object per round.
pub fn write_trace_jsonl<W: Write>(trace: &[RoundTrace], mut w: W) -> Result<()> {
    for r in trace {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Labels `x` through `h`, checking the output length and finiteness.
/// `offset` is the dataset index of the first row, used in error messages.
pub(crate) fn label_rows<T, H>(
    h: &H,
    x: &Array2<T>,
    expected: Option<usize>,
    offset: usize,
) -> Result<Array2<T>>
where
    T: Real,
    H: Fn(&[T]) -> Vec<T> + Sync,
{
    let ys: Vec<Vec<T>> = x
        .rows()
        .into_iter()
        .map(|r| r.to_vec())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r| h(&r))
        .collect();
    let p = expected.unwrap_or_else(|| ys.first().map_or(0, Vec::len));
    let mut out = Array2::zeros((ys.len(), p));
    for (i, y) in ys.iter().enumerate() {
        if y.len() != p || p == 0 {
            return Err(Error::Evaluation {
                index: offset + i,
                reason: format!("expected {p} outputs, got {}", y.len()),
            });
        }
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                index: offset + i,
                reason: format!("non-finite output {v}"),
            });
        }
        out.row_mut(i).iter_mut().zip(y).for_each(|(o, &v)| *o = v);
    }
    Ok(out)
}

/// Runs the acquisition loop with an explicit model trainer.
pub fn active_learn_with<T, H, M>(
    h: &H,
    bounds: &BoundsBox<T>,
    cfg: &ALConfig,
    trainer: &M,
    seed: Seed,
) -> Result<ALOutcome<T, M::Model>>
where
    T: Real,
    H: Fn(&[T]) -> Vec<T> + Sync,
    M: SurrogateTrainer<T>,
{
    cfg.validate()?;
    let x0 = lhs_sample(bounds, cfg.n0, seed.derive("al-initial", 0))?.points;
    let y0 = label_rows(h, &x0, None, 0)?;
    let p = y0.ncols();
    let mut data = LabeledDataset::new(x0, y0)?;
    let mut evaluations = cfg.n0;
    let mut model = trainer.train(&data, seed.derive("al-model", 0))?;
    let mut trace = Vec::with_capacity(cfg.rounds());

    let mut round = 0;
    while evaluations < cfg.n_max {
        round += 1;
        let seeds: Vec<Seed> = (0..cfg.k)
            .map(|i| seed.derive("al-pso", ((round - 1) * cfg.k + i) as u64))
            .collect();
        let model_ref = &model;
        let found = seeds
            .par_iter()
            .map(|&s| {
                pso_maximize(
                    |x: &[T]| model_ref.total_uncertainty(x),
                    bounds,
                    &cfg.pso,
                    s,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let mut xb = Array2::zeros((cfg.k, bounds.dim()));
        for (i, f) in found.iter().enumerate() {
            xb.row_mut(i)
                .iter_mut()
                .zip(&f.position)
                .for_each(|(o, &v)| *o = v);
        }
        let yb = label_rows(h, &xb, Some(p), data.len())?;
        data.extend(xb.view(), yb.view())?;
        evaluations += cfg.k;

        trace.push(RoundTrace {
            round,
            points: found
                .iter()
                .map(|f| f.position.iter().map(|v| v.as_f64()).collect())
                .collect(),
            uncertainty: found.iter().map(|f| f.value.as_f64()).collect(),
            pso_seeds: seeds.iter().map(|s| s.0).collect(),
        });
        model = trainer.train(&data, seed.derive("al-model", round as u64))?;
    }

    Ok(ALOutcome {
        dataset: data,
        model,
        trace,
        evaluations,
    })
}

/// Runs the acquisition loop with the model named in `cfg.model_kind`.
pub fn active_learn<T, H>(
    h: &H,
    bounds: &BoundsBox<T>,
    cfg: &ALConfig,
    seed: Seed,
) -> Result<ALOutcome<T, UncertaintyModel<T>>>
where
    T: Real,
    H: Fn(&[T]) -> Vec<T> + Sync,
{
    active_learn_with(h, bounds, cfg, &cfg.model_kind, seed)
}
