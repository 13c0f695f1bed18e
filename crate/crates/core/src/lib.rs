//! Inverse design with active-learning data generation and tandem networks.
//!
//! The numeric core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `f64` aliases below are what the experiment
//! harness and the CLI use.

pub mod acquisition;
pub mod benchmarks;
mod dataset;
mod error;
pub mod harness;
pub mod model_io;
pub mod nn;
pub mod numcore;
pub mod samplers;
mod scalar;
pub mod surrogates;

pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use numcore::{BoundsBox, MetricsReport, ScalerParams, Seed, SummaryStats};
pub use scalar::Real;

pub type Bounds = BoundsBox<f64>;
pub type Dataset = LabeledDataset<f64>;
pub type Metrics = MetricsReport<f64>;
pub type Summary = SummaryStats<f64>;
pub type Scaler = ScalerParams<f64>;
pub type Mlp = nn::MlpModel<f64>;
pub type Tandem = nn::TandemModel<f64>;
pub type Ensemble = surrogates::EnsembleModel<f64>;
pub type Forest = surrogates::ForestModel<f64>;
pub type Surrogate = surrogates::UncertaintyModel<f64>;
pub type Problem = benchmarks::BenchmarkProblem<f64>;
pub type TestSet = benchmarks::TestSet<f64>;
