//! Experiment harness: repeated runs of every data-collection method on a
//! benchmark, inverse validation against a shared held-out test set, and the
//! files that record the results.

mod config;
mod output;
mod run;
mod summary;

pub use config::{benchmark_defaults, ExperimentConfig, Method, TandemOverrides};
pub use output::{
    read_records, records_jsonl, summarize_dir, write_outputs, Conventions, Manifest, ManifestRun,
    TestSetInfo,
};
pub use run::{
    run_experiment, run_method, run_seed, validate_forward, validate_inverse,
    validate_inverse_detailed, ExperimentOutcome, ExperimentRecord, InverseValidation,
    RunArtifacts, RunTiming,
};
pub use summary::{boxplot_csv, summarize_experiment, SummaryRow, SummaryTable, METRICS};
