//! Deterministic numeric primitives shared by the rest of the crate.

mod bounds;
pub mod metrics;
pub mod rng;
mod scaler;
mod stats;

pub use bounds::BoundsBox;
pub use metrics::{nmae, r2, rmse, MetricsReport};
pub use rng::{Seed, StreamRng};
pub use scaler::{minmax_fit, minmax_inverse, minmax_transform, ScalerParams};
pub use stats::{mean_std_columns, summarize, SummaryStats};
