use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{ExperimentOutcome, ExperimentRecord};
use super::summary::{boxplot_csv, summarize_experiment};
use crate::acquisition::write_trace_jsonl;
use crate::benchmarks::{problem_by_name, sha256_hex, DiffusionGrid};
use crate::model_io::{ModelBody, ModelDocument};
use crate::{Error, Problem, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub method: String,
    pub repetition: usize,
    pub seed: u64,
    pub status: String,
    pub dataset_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetInfo {
    pub size: usize,
    pub tx_sha256: String,
    pub ty_sha256: String,
}

/// Fixed conventions the numbers depend on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub scaling: String,
    pub sampler_distance_space: String,
    pub tandem_loss_space: String,
    pub std: String,
    pub uncertainty: String,
    pub n_max: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffusion_grid: Option<DiffusionGrid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scalar: String,
    pub config: ExperimentConfig,
    pub base_seed: u64,
    pub runs: Vec<ManifestRun>,
    pub test_set: TestSetInfo,
    /// SHA-256 of each written output file, keyed by relative path.
    pub files: BTreeMap<String, String>,
    pub dependencies: BTreeMap<String, String>,
    pub conventions: Conventions,
}

fn conventions(prob: &Problem) -> Conventions {
    let sbr = prob.name == "sbr";
    Conventions {
        scaling: "per-column min-max to [0,1], fit on the training set".into(),
        sampler_distance_space: "unit hypercube".into(),
        tandem_loss_space: "scaled".into(),
        std: "population".into(),
        uncertainty: "sum of per-output member std".into(),
        n_max: "total evaluations including the initial design".into(),
        initial_condition: sbr.then(|| "zero concentration".into()),
        diffusion_grid: sbr.then(DiffusionGrid::default),
    }
}

fn dependencies() -> BTreeMap<String, String> {
    [
        ("ndarray", "0.17"),
        ("rand", "0.9"),
        ("rand_chacha", "0.9"),
        ("rayon", "1"),
        ("serde_json", "1"),
        ("sha2", "0.10"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v.to_owned()))
    .collect()
}

fn write_hashed(
    dir: &Path,
    rel: &str,
    content: &[u8],
    files: &mut BTreeMap<String, String>,
) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, content)?;
    files.insert(rel.to_owned(), sha256_hex(content));
    Ok(())
}

pub fn records_jsonl(records: &[ExperimentRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Writes every artifact of an experiment into `dir`:
/// `records.jsonl`, `timings.jsonl`, `summary.csv`, `boxplot_data.csv`,
/// `Tx.csv`/`Ty.csv`, per-run active-learning traces under `traces/`,
/// optional tandem models under `models/`, and `manifest.json`.
pub fn write_outputs(dir: &Path, outcome: &ExperimentOutcome) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let cfg = &outcome.config;
    let prob: Problem = problem_by_name(&cfg.benchmark)?;
    let records = outcome.records();
    let mut files = BTreeMap::new();

    let (tx_sha256, ty_sha256) = outcome.test_set.write_csv(dir, &prob)?;
    files.insert("Tx.csv".into(), tx_sha256.clone());
    files.insert("Ty.csv".into(), ty_sha256.clone());

    write_hashed(
        dir,
        "records.jsonl",
        records_jsonl(&records)?.as_bytes(),
        &mut files,
    )?;
    let table = summarize_experiment(&records)?;
    write_hashed(dir, "summary.csv", table.to_csv().as_bytes(), &mut files)?;
    write_hashed(
        dir,
        "boxplot_data.csv",
        boxplot_csv(&records).as_bytes(),
        &mut files,
    )?;

    let mut timings = BufWriter::new(File::create(dir.join("timings.jsonl"))?);
    for run in &outcome.runs {
        serde_json::to_writer(&mut timings, &run.timing)?;
        timings.write_all(b"\n")?;
    }
    timings.flush()?;

    for run in &outcome.runs {
        let tag = format!("{}_rep{:03}", run.record.method, run.record.repetition);
        if let Some(trace) = &run.trace {
            let mut buf = Vec::new();
            write_trace_jsonl(trace, &mut buf)?;
            write_hashed(dir, &format!("traces/{tag}.jsonl"), &buf, &mut files)?;
        }
        if let Some(model) = &run.model {
            let doc = ModelDocument::new(ModelBody::Tandem(model.clone()));
            write_hashed(
                dir,
                &format!("models/{tag}.json"),
                doc.to_json()?.as_bytes(),
                &mut files,
            )?;
        }
    }

    let manifest = Manifest {
        tool: "autotandem".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scalar: "f64".into(),
        config: cfg.clone(),
        base_seed: cfg.seed,
        runs: records
            .iter()
            .map(|r| ManifestRun {
                method: r.method.to_string(),
                repetition: r.repetition,
                seed: r.seed,
                status: r.status.clone(),
                dataset_hash: r.dataset_hash.clone(),
            })
            .collect(),
        test_set: TestSetInfo {
            size: outcome.test_set.len(),
            tx_sha256,
            ty_sha256,
        },
        files,
        dependencies: dependencies(),
        conventions: conventions(&prob),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Recomputes `summary.csv` and `boxplot_data.csv` from an existing
/// `records.jsonl` in `dir`, returning the summary text.
pub fn summarize_dir(dir: &Path) -> Result<String> {
    let path = dir.join("records.jsonl");
    if !path.exists() {
        return Err(Error::Config(format!("{} not found", path.display())));
    }
    let records = read_records(&path)?;
    let csv = summarize_experiment(&records)?.to_csv();
    fs::write(dir.join("summary.csv"), &csv)?;
    fs::write(dir.join("boxplot_data.csv"), boxplot_csv(&records))?;
    Ok(csv)
}
