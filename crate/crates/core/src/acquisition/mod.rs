//! Uncertainty-driven acquisition: PSO search and the active-learning loop.

mod active;
mod pso;

pub(crate) use active::label_rows;
pub use active::{
    active_learn, active_learn_with, write_trace_jsonl, ALConfig, ALOutcome, RoundTrace,
    SurrogateTrainer,
};
pub use pso::{pso_maximize, PsoConfig, PsoOutcome};
