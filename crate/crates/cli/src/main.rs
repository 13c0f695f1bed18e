use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use autotandem::benchmarks::{
    make_test_set, problem_by_name, sbr::GRID_CELLS, sbr_measure, sbr_solve,
};
use autotandem::harness::{
    run_experiment, summarize_dir, summarize_experiment, validate_forward,
    validate_inverse_detailed, write_outputs, ExperimentConfig, Method,
};
use autotandem::model_io::{ModelBody, ModelDocument};
use autotandem::samplers::{SampleBatch, SamplerKind};
use autotandem::surrogates::ModelKind;
use autotandem::{Metrics, Problem, Seed, TestSet};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

#[derive(Parser)]
#[command(
    name = "autotandem",
    version,
    about = "Active-learning data generation and tandem networks for inverse design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full method comparison on a benchmark.
    Run(RunArgs),
    /// Draw a design sample and write it as CSV.
    Sample(SampleArgs),
    /// Solve the diffusion problem for one top-boundary profile.
    SolveSbr(SolveArgs),
    /// Score a saved model on a benchmark test set.
    Validate(ValidateArgs),
    /// Recompute summary.csv and boxplot_data.csv from records.jsonl.
    Summarize { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// JSON file with ExperimentConfig fields; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    benchmark: Option<String>,
    /// Comma-separated subset of al,random,lhs,bc,gfp.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Uncertainty model for active learning: forest or deep-ensemble.
    #[arg(long)]
    model_kind: Option<String>,
    #[arg(long)]
    test_size: Option<usize>,
    /// Override the epoch limit of both tandem networks.
    #[arg(long)]
    tandem_epochs: Option<usize>,
    /// Also write every trained tandem model under DIR/models.
    #[arg(long)]
    save_models: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "lhs")]
    sampler: SamplerKind,
    #[arg(long, default_value = "sbr")]
    benchmark: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the benchmark responses as extra columns.
    #[arg(long)]
    evaluate: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// File with 20 top-boundary values (JSON array, CSV or whitespace separated).
    #[arg(long)]
    bc: PathBuf,
    /// Print the full 20x20 concentration field instead of the 30 measurements.
    #[arg(long)]
    field: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "sbr")]
    benchmark: String,
    /// Directory holding Tx.csv and Ty.csv; a fresh test set is drawn otherwise.
    #[arg(long)]
    test_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_model_kind(s: &str) -> Result<ModelKind> {
    match s.to_ascii_lowercase().replace('-', "_").as_str() {
        "forest" | "rf" => Ok(ModelKind::forest()),
        "deep_ensemble" | "de" | "ensemble" => Ok(ModelKind::deep_ensemble()),
        other => bail!("unknown model kind {other:?} (expected forest or deep-ensemble)"),
    }
}

fn build_config(a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(b) = &a.benchmark {
        cfg.benchmark = b.clone();
    }
    if let Some(m) = &a.methods {
        cfg.methods = m.clone();
    }
    if a.n_max.is_some() {
        cfg.n_max = a.n_max;
    }
    if let Some(r) = a.reps {
        cfg.repetitions = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(k) = &a.model_kind {
        cfg.model_kind = Some(parse_model_kind(k)?);
    }
    if let Some(n) = a.test_size {
        cfg.test_size = n;
    }
    if let Some(e) = a.tandem_epochs {
        cfg.tandem.epochs = Some(e);
    }
    cfg.save_models |= a.save_models;
    Ok(cfg.resolved()?)
}

fn cmd_run(a: &RunArgs) -> Result<()> {
    let cfg = build_config(a)?;
    eprintln!(
        "running {} on {} with n_max={} reps={} seed={}",
        cfg.methods
            .iter()
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(","),
        cfg.benchmark,
        cfg.n_max(),
        cfg.repetitions,
        cfg.seed
    );
    let start = Instant::now();
    let outcome = run_experiment(&cfg)?;
    write_outputs(&a.out, &outcome)?;
    let records = outcome.records();
    let failed: Vec<_> = records.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        eprintln!(
            "failed: {} rep {}: {}",
            r.method,
            r.repetition,
            r.failure.as_deref().unwrap_or("")
        );
    }
    let table = summarize_experiment(&records)?;
    emit(&table.to_csv())?;
    let lhs = Method::Sampler(SamplerKind::Lhs);
    if cfg.methods.contains(&lhs) {
        for line in table.comparison_lines(lhs) {
            eprintln!("{line}");
        }
    }
    eprintln!(
        "{} records ({} failed) written to {} in {:.1}s",
        records.len(),
        failed.len(),
        a.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let prob: Problem = problem_by_name(&a.benchmark)?;
    let batch = a.sampler.sample(&prob.bounds, a.n, Seed(a.seed))?;
    let text = if a.evaluate {
        let y = prob.evaluate_rows(batch.points.view())?;
        let joined = ndarray::concatenate(ndarray::Axis(1), &[batch.points.view(), y.view()])?;
        let names: Vec<String> = prob
            .dim_names
            .iter()
            .cloned()
            .chain(prob.output_names())
            .collect();
        SampleBatch { points: joined }.to_csv(&names)?
    } else {
        batch.to_csv(&prob.dim_names)?
    };
    match &a.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&text)?,
    }
    Ok(())
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("not a number: {s:?}"))
        })
        .collect()
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let bc = read_numbers(&a.bc)?;
    if bc.len() != GRID_CELLS {
        bail!("expected {GRID_CELLS} boundary values, got {}", bc.len());
    }
    let field = sbr_solve(&bc)?;
    let mut out = String::new();
    if a.field {
        // Top row first, as the field would be drawn.
        for row in field.rows().into_iter().rev() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    } else {
        for v in sbr_measure(&field) {
            out.push_str(&format!("{v}\n"));
        }
    }
    emit(&out)
}

fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let cols = reader.headers()?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec?;
        for field in rec.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .with_context(|| format!("{}: bad value {field:?}", path.display()))?,
            );
        }
        rows += 1;
    }
    Ok(Array2::from_shape_vec((rows, cols), data)?)
}

fn metrics_line(label: &str, m: &Metrics) -> String {
    format!("{label}: rmse={} r2={} nmae={}\n", m.rmse, m.r2, m.nmae)
}

/// Writes to standard output, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let prob: Problem = problem_by_name(&a.benchmark)?;
    let doc = ModelDocument::<f64>::load(&a.model)
        .with_context(|| format!("loading {}", a.model.display()))?;
    let ts = match &a.test_dir {
        Some(dir) => TestSet {
            tx: read_matrix(&dir.join("Tx.csv"))?,
            ty: read_matrix(&dir.join("Ty.csv"))?,
        },
        None => make_test_set(&prob, a.test_size, Seed(a.seed))?,
    };
    if ts.tx.ncols() != prob.input_dim() || ts.ty.ncols() != prob.output_dim {
        bail!("test set does not match benchmark {}", prob.name);
    }
    let text = match doc.body {
        ModelBody::Tandem(t) => {
            let v = validate_inverse_detailed(&t, &prob, &ts)?;
            metrics_line("inverse", &v.metrics) + &format!("clamped components: {}\n", v.clamped)
        }
        ModelBody::Ensemble(m) => metrics_line("forward", &validate_forward(&m, &ts)?),
        ModelBody::Forest(m) => metrics_line("forward", &validate_forward(&m, &ts)?),
        ModelBody::Mlp(m) => {
            let pred = m.forward(ts.tx.view())?;
            metrics_line("forward", &Metrics::evaluate(ts.ty.view(), pred.view())?)
        }
    };
    emit(&text)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => cmd_run(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::SolveSbr(a) => cmd_solve(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Summarize { dir } => emit(&summarize_dir(&dir)?),
    }
}
