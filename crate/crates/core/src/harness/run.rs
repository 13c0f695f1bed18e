use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::acquisition::{active_learn, RoundTrace};
use crate::benchmarks::{make_test_set, problem_by_name};
use crate::nn::tandem_fit;
use crate::surrogates::UncertaintyPredictor;
use crate::{Error, LabeledDataset, Metrics, Problem, Result, Seed, Tandem, TestSet};

/// Outcome of one (method, repetition) run. Contains nothing time dependent,
/// so reruns with the same configuration serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub benchmark: String,
    pub method: Method,
    pub repetition: usize,
    pub seed: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub n_samples: usize,
    pub dataset_hash: Option<String>,
    pub inverse_metrics: Option<Metrics>,
    /// Held-out accuracy of the final uncertainty model (active learning only).
    pub forward_metrics: Option<Metrics>,
    pub clamped_components: usize,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Wall-clock seconds spent in each phase of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub method: Method,
    pub repetition: usize,
    pub data_s: f64,
    pub tandem_s: f64,
    pub validation_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub record: ExperimentRecord,
    pub timing: RunTiming,
    pub trace: Option<Vec<RoundTrace>>,
    pub model: Option<Tandem>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Fully resolved configuration.
    pub config: ExperimentConfig,
    pub test_set: TestSet,
    /// Ordered by method (configuration order), then repetition.
    pub runs: Vec<RunArtifacts>,
}

impl ExperimentOutcome {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        self.runs.iter().map(|r| r.record.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseValidation {
    pub metrics: Metrics,
    /// Design components moved back inside the bounds before evaluation.
    pub clamped: usize,
    pub evaluations: usize,
}

/// Seed of a run; depends only on the base seed, the method and the repetition.
pub fn run_seed(base: u64, method: Method, repetition: usize) -> Seed {
    Seed(base).derive(method.name(), repetition as u64)
}

/// Inverse validation: predicts a design for every test response, clamps it
/// into the design space, evaluates the high-fidelity function once per test
/// point and scores the reproduced responses against the targets.
pub fn validate_inverse_detailed(
    t: &Tandem,
    prob: &Problem,
    ts: &TestSet,
) -> Result<InverseValidation> {
    let mut xhat = t.predict_designs(ts.ty.view())?;
    let mut clamped = 0;
    for mut row in xhat.rows_mut() {
        let slice = row.as_slice_mut().expect("standard layout");
        if slice.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("inverse network prediction".into()));
        }
        clamped += prob.bounds.clamp(slice);
    }
    let yhat = prob.evaluate_rows(xhat.view())?;
    Ok(InverseValidation {
        metrics: Metrics::evaluate(ts.ty.view(), yhat.view())?,
        clamped,
        evaluations: xhat.nrows(),
    })
}

pub fn validate_inverse(t: &Tandem, prob: &Problem, ts: &TestSet) -> Result<Metrics> {
    validate_inverse_detailed(t, prob, ts).map(|v| v.metrics)
}

/// Forward accuracy of an uncertainty model's mean prediction on the test set.
pub fn validate_forward<M: UncertaintyPredictor<f64> + ?Sized>(
    m: &M,
    ts: &TestSet,
) -> Result<Metrics> {
    let pred = m.predict_mean(ts.tx.view())?;
    Metrics::evaluate(ts.ty.view(), pred.view())
}

struct RunData {
    dataset: LabeledDataset<f64>,
    forward: Option<Metrics>,
    trace: Option<Vec<RoundTrace>>,
}

fn collect_data(
    method: Method,
    prob: &Problem,
    cfg: &ExperimentConfig,
    ts: &TestSet,
    seed: Seed,
) -> Result<RunData> {
    let h = |x: &[f64]| prob.evaluate(x);
    match method {
        Method::ActiveLearning => {
            let out = active_learn(
                &h,
                &prob.bounds,
                &cfg.al_config()?,
                seed.derive("active", 0),
            )?;
            let forward = validate_forward(&out.model, ts)?;
            Ok(RunData {
                dataset: out.dataset,
                forward: Some(forward),
                trace: Some(out.trace),
            })
        }
        Method::Sampler(kind) => {
            let x: Array2<f64> = kind
                .sample(&prob.bounds, cfg.n_max(), seed.derive("sampler", 0))?
                .points;
            let y = prob.evaluate_rows(x.view())?;
            Ok(RunData {
                dataset: LabeledDataset::new(x, y)?,
                forward: None,
                trace: None,
            })
        }
    }
}

/// Runs one method once: collect data, fit the tandem pair, validate.
/// Failures are recorded rather than propagated.
pub fn run_method(
    method: Method,
    repetition: usize,
    prob: &Problem,
    cfg: &ExperimentConfig,
    ts: &TestSet,
) -> RunArtifacts {
    let seed = run_seed(cfg.seed, method, repetition);
    let mut record = ExperimentRecord {
        benchmark: prob.name.clone(),
        method,
        repetition,
        seed: seed.0,
        status: "ok".into(),
        failure: None,
        n_samples: 0,
        dataset_hash: None,
        inverse_metrics: None,
        forward_metrics: None,
        clamped_components: 0,
    };
    let mut timing = RunTiming {
        method,
        repetition,
        data_s: 0.0,
        tandem_s: 0.0,
        validation_s: 0.0,
        total_s: 0.0,
    };
    let mut trace = None;
    let mut model = None;

    let start = Instant::now();
    let result = (|| -> Result<()> {
        let t0 = Instant::now();
        let data = collect_data(method, prob, cfg, ts, seed)?;
        timing.data_s = t0.elapsed().as_secs_f64();
        record.n_samples = data.dataset.len();
        record.dataset_hash = Some(data.dataset.content_hash());
        record.forward_metrics = data.forward;
        trace = data.trace;

        let t1 = Instant::now();
        let spec = cfg.tandem_spec(prob.input_dim(), prob.output_dim);
        let tandem = tandem_fit(&data.dataset, &spec, seed.derive("tandem", 0))?;
        timing.tandem_s = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let v = validate_inverse_detailed(&tandem, prob, ts)?;
        timing.validation_s = t2.elapsed().as_secs_f64();
        if !v.metrics.is_finite() {
            return Err(Error::NonFinite("inverse metrics".into()));
        }
        record.inverse_metrics = Some(v.metrics);
        record.clamped_components = v.clamped;
        if cfg.save_models {
            model = Some(tandem);
        }
        Ok(())
    })();
    if let Err(e) = result {
        record.status = "failed".into();
        record.failure = Some(e.to_string());
        record.inverse_metrics = None;
    }
    timing.total_s = start.elapsed().as_secs_f64();
    RunArtifacts {
        record,
        timing,
        trace,
        model,
    }
}

/// Runs every configured method for every repetition against one shared
/// test set. Runs execute in parallel; the result order is fixed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let cfg = cfg.resolved()?;
    let prob: Problem = problem_by_name(&cfg.benchmark)?;
    let test_set = make_test_set(&prob, cfg.test_size, Seed(cfg.seed))?;
    let jobs: Vec<(Method, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&m| (0..cfg.repetitions).map(move |r| (m, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(m, r)| run_method(m, r, &prob, &cfg, &test_set))
        .collect();
    Ok(ExperimentOutcome {
        config: cfg,
        test_set,
        runs,
    })
}
