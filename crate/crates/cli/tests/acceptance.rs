//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! runtime; the process exits non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use autotandem::acquisition::{active_learn, ALConfig};
use autotandem::benchmarks::{sbr_problem, sbr_solve, BenchmarkProblem};
use autotandem::harness::validate_inverse;
use autotandem::nn::{loss_and_gradients, mlp_init, tandem_fit, LossKind, MlpModel, MlpSpec};
use autotandem::numcore::rng::uniform;
use autotandem::numcore::{nmae, r2, rmse};
use autotandem::samplers::{
    farthest_point_sample_with, lhs_sample, CandidateSchedule, SamplerKind, BC_BASE, GFP_CANDIDATES,
};
use autotandem::surrogates::{DeepEnsembleConfig, ModelKind};
use autotandem::{BoundsBox, Dataset, Problem, Seed, TestSet};
use ndarray::{array, Array2};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// 1. Metric oracles ---------------------------------------------------------

fn naive_metrics(y: &Array2<f64>, p: &Array2<f64>) -> (f64, f64, f64) {
    let (n, m) = y.dim();
    let (mut sse, mut ss_tot, mut nm) = (0.0, 0.0, 0.0);
    for j in 0..m {
        let mut mean = 0.0;
        for i in 0..n {
            mean += y[[i, j]];
        }
        mean /= n as f64;
        let (mut err, mut dev) = (0.0f64, 0.0f64);
        for i in 0..n {
            let e = y[[i, j]] - p[[i, j]];
            sse += e * e;
            ss_tot += (y[[i, j]] - mean).powi(2);
            err = err.max(e.abs());
            dev = dev.max((y[[i, j]] - mean).abs());
        }
        nm += err / dev;
    }
    (
        (sse / (n * m) as f64).sqrt(),
        1.0 - sse / ss_tot,
        nm / m as f64,
    )
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let mut rng = Seed(k).rng();
        let y = Array2::from_shape_simple_fn((50, 7), || uniform(&mut rng, -3.0, 3.0));
        let p = Array2::from_shape_simple_fn((50, 7), || uniform(&mut rng, -3.0, 3.0));
        let (a, b, c) = naive_metrics(&y, &p);
        worst = worst
            .max((rmse(y.view(), p.view()).unwrap() - a).abs())
            .max((r2(y.view(), p.view()).unwrap() - b).abs())
            .max((nmae(y.view(), p.view()).unwrap() - c).abs());
    }
    check(worst <= 1e-12, format!("max deviation {worst:e}"))?;
    let y = array![[0.0, 1.0], [1.0, 0.0]];
    let p = array![[1.0, 1.0], [1.0, 1.0]];
    check(
        rmse(y.view(), p.view()).unwrap() == 0.5f64.sqrt(),
        "rmse fixed case",
    )?;
    let y = array![[1.0, 10.0], [3.0, 20.0], [5.0, 30.0]];
    let mean = array![[3.0, 20.0], [3.0, 20.0], [3.0, 20.0]];
    check(
        r2(y.view(), mean.view()).unwrap() == 0.0,
        "r2 of mean predictor",
    )?;
    check(
        nmae(y.view(), mean.view()).unwrap() == 1.0,
        "nmae of mean predictor",
    )?;
    Ok(format!(
        "max deviation from naive oracle {worst:.1e}; fixed cases exact"
    ))
}

// 2. Gradient checks --------------------------------------------------------

fn probe_net(input: usize, output: usize, seed: Seed) -> MlpModel<f64> {
    let spec = MlpSpec {
        hidden: vec![4],
        ..MlpSpec::tandem_default(input, output)
    };
    let mut m: MlpModel<f64> = mlp_init(&spec, seed).unwrap();
    let mut rng = seed.derive("params", 0).rng();
    let params: Vec<f64> = (0..m.parameter_count())
        .map(|_| uniform(&mut rng, -1.0, 1.0))
        .collect();
    m.set_flat_parameters(&params).unwrap();
    m
}

fn gradient_error(
    model: &MlpModel<f64>,
    x: &Array2<f64>,
    y: &Array2<f64>,
    loss: LossKind<'_, f64>,
) -> f64 {
    let h = 1e-5;
    let analytic = loss_and_gradients(model, x.view(), y.view(), loss)
        .unwrap()
        .1
        .flatten();
    let base = model.flat_parameters();
    let eval = |p: &[f64]| {
        let mut m = model.clone();
        m.set_flat_parameters(p).unwrap();
        loss_and_gradients(&m, x.view(), y.view(), loss).unwrap().0
    };
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let (mut a, mut b) = (base.clone(), base.clone());
        a[i] += h;
        b[i] -= h;
        let numeric = (eval(&a) - eval(&b)) / (2.0 * h);
        worst = worst
            .max((analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6));
    }
    worst
}

fn criterion_2() -> Outcome {
    let (mut plain, mut tandem) = (0.0f64, 0.0f64);
    for probe in 0..20u64 {
        let s = Seed(70_000 + probe);
        let mut rng = s.derive("data", 0).rng();
        let x = Array2::from_shape_simple_fn((6, 3), || uniform(&mut rng, -1.0, 1.0));
        let y2 = Array2::from_shape_simple_fn((6, 2), || uniform(&mut rng, -1.0, 1.0));
        let net = probe_net(3, 2, s.derive("net", 0));
        plain = plain.max(gradient_error(&net, &x, &y2, LossKind::Rmse));
        let forward = probe_net(2, 3, s.derive("forward", 0));
        tandem = tandem.max(gradient_error(
            &net,
            &x,
            &x,
            LossKind::Tandem { forward: &forward },
        ));
    }
    check(
        plain < 1e-4 && tandem < 1e-4,
        format!("rmse {plain:.2e}, tandem {tandem:.2e}"),
    )?;
    Ok(format!(
        "max relative error: rmse {plain:.2e}, tandem {tandem:.2e} (3-4-2 net, 20 probes)"
    ))
}

// 3. PDE solver -------------------------------------------------------------

/// 1-D solution with c = bc on the top face, zero flux at the bottom and a
/// zero initial field.
fn series(y: f64, t: f64, bc: f64) -> f64 {
    let mut s = 0.0;
    for n in 0..200 {
        let k = (2 * n + 1) as f64 * std::f64::consts::PI / 2.0;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * 2.0 / k * (k * y).cos() * (-k * k * t).exp();
    }
    bc * (1.0 - s)
}

fn criterion_3() -> Outcome {
    let f = sbr_solve(&[30.0; 20]).unwrap();
    let mut worst = 0.0f64;
    for j in 0..20 {
        let exact = series((j as f64 + 0.5) / 20.0, 0.1, 30.0);
        for i in 0..20 {
            worst = worst.max((f[[j, i]] - exact).abs() / exact);
        }
    }
    check(worst < 0.01, format!("max relative error {worst:.3e}"))?;
    let mut rng = Seed(3).rng();
    let u: Vec<f64> = (0..20).map(|_| uniform(&mut rng, 0.0, 30.0)).collect();
    let v: Vec<f64> = (0..20).map(|_| uniform(&mut rng, 0.0, 30.0)).collect();
    let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.7 * a - 1.3 * b).collect();
    let (fu, fv, fm) = (
        sbr_solve(&u).unwrap(),
        sbr_solve(&v).unwrap(),
        sbr_solve(&mix).unwrap(),
    );
    let lin = fm
        .iter()
        .zip(fu.iter().zip(fv.iter()))
        .map(|(m, (a, b))| (m - (0.7 * a - 1.3 * b)).abs())
        .fold(0.0, f64::max);
    check(lin < 1e-10, format!("linearity defect {lin:e}"))?;
    let rev: Vec<f64> = u.iter().rev().copied().collect();
    let fr = sbr_solve(&rev).unwrap();
    let mut mirror = 0.0f64;
    for j in 0..20 {
        for i in 0..20 {
            mirror = mirror.max((fu[[j, i]] - fr[[j, 19 - i]]).abs());
        }
    }
    check(mirror < 1e-12, format!("mirror defect {mirror:e}"))?;
    Ok(format!(
        "series max rel err {:.3}%, linearity {lin:.1e}, mirror {mirror:.1e}",
        worst * 100.0
    ))
}

// 4. Samplers ---------------------------------------------------------------

fn criterion_4() -> Outcome {
    for &n in &[1usize, 4, 20, 400] {
        for &d in &[1usize, 3, 20] {
            let b = BoundsBox::new(
                (0..d).map(|j| -(j as f64)).collect(),
                (0..d).map(|j| 1.0 + j as f64).collect(),
            )
            .unwrap();
            let pts = lhs_sample(&b, n, Seed((n * 31 + d) as u64)).unwrap().points;
            for j in 0..d {
                let mut hits = vec![0; n];
                for i in 0..n {
                    let u = (pts[[i, j]] - b.lower()[j]) / b.width(j);
                    check((0.0..=1.0).contains(&u), "LHS point out of bounds")?;
                    hits[((u * n as f64) as usize).min(n - 1)] += 1;
                }
                check(
                    hits.iter().all(|&h| h == 1),
                    format!("LHS n={n} d={d} axis {j} not stratified"),
                )?;
            }
        }
    }
    let b = BoundsBox::uniform(3, -2.0, 2.0).unwrap();
    for schedule in [
        CandidateSchedule::Constant(GFP_CANDIDATES),
        CandidateSchedule::Growing { base: BC_BASE },
    ] {
        let mut rng = Seed(8).rng();
        let mut pools: Vec<Vec<Vec<f64>>> = Vec::new();
        let out = farthest_point_sample_with(&b, 12, schedule, |_, count| {
            let pool: Vec<Vec<f64>> = (0..count)
                .map(|_| (0..3).map(|_| uniform(&mut rng, -2.0, 2.0)).collect())
                .collect();
            pools.push(pool.clone());
            pool
        })
        .unwrap();
        let rows: Vec<Vec<f64>> = out.points.rows().into_iter().map(|r| r.to_vec()).collect();
        let nearest = |p: &[f64], set: &[Vec<f64>]| {
            set.iter()
                .map(|s| s.iter().zip(p).map(|(a, c)| (a - c).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        };
        for i in 1..12 {
            check(pools[i].len() == schedule.count(i), "candidate count")?;
            let chosen = nearest(&rows[i], &rows[..i]);
            check(
                pools[i].iter().all(|c| nearest(c, &rows[..i]) <= chosen),
                "not the farthest candidate",
            )?;
        }
    }
    for kind in SamplerKind::ALL {
        let pts = kind.sample(&b, 50, Seed(4)).unwrap().points;
        check(
            pts.rows()
                .into_iter()
                .all(|r| b.contains(r.as_slice().unwrap())),
            format!("{} out of bounds", kind.name()),
        )?;
    }
    Ok(
        "LHS strata exact for all 12 (n, d); GFP/BC hook contract holds; all samplers in bounds"
            .into(),
    )
}

// 5. Active-learning budget ---------------------------------------------------

fn criterion_5() -> Outcome {
    let prob: Problem = sbr_problem();
    let kind = ModelKind::DeepEnsemble(DeepEnsembleConfig {
        epochs: 20,
        ..Default::default()
    });
    let mut parts = Vec::new();
    for n_max in [20, 30, 50] {
        let calls = AtomicUsize::new(0);
        let h = |x: &[f64]| {
            calls.fetch_add(1, Ordering::SeqCst);
            prob.evaluate(x)
        };
        let cfg = ALConfig::new(n_max, kind.clone());
        let out = active_learn(&h, &prob.bounds, &cfg, Seed(5)).map_err(|e| e.to_string())?;
        let called = calls.load(Ordering::SeqCst);
        check(
            called == n_max,
            format!("n_max={n_max}: H called {called} times"),
        )?;
        check(
            out.trace.len() == (n_max - 20) / 5,
            format!("n_max={n_max}: {} rounds", out.trace.len()),
        )?;
        parts.push(format!(
            "{n_max}->{called} calls/{} rounds",
            out.trace.len()
        ));
    }
    Ok(parts.join(", "))
}

// 6. Affine fixture -------------------------------------------------------------

fn affine_problem() -> Problem {
    let a = [
        [1.0, 0.2, 0.0, -0.3],
        [0.0, 1.0, 0.4, 0.0],
        [0.3, 0.0, 1.0, 0.2],
        [-0.2, 0.1, 0.0, 1.0],
        [0.5, -0.5, 0.5, 0.5],
        [0.2, 0.6, -0.4, 0.3],
    ];
    let b = [0.5, -1.0, 0.0, 2.0, 1.0, -0.5];
    let bounds = BoundsBox::uniform(4, -1.0, 1.0).unwrap();
    let names = (1..=4).map(|i| format!("x{i}")).collect();
    BenchmarkProblem::new("affine", names, bounds, 6, move |x: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(row, bj)| row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() + bj)
            .collect()
    })
    .unwrap()
}

fn criterion_6() -> Outcome {
    let prob = affine_problem();
    let mut scores = Vec::new();
    for s in 1..=3u64 {
        let x = lhs_sample(&prob.bounds, 150, Seed(1000 + s))
            .unwrap()
            .points;
        let y = prob.evaluate_rows(x.view()).unwrap();
        let t = tandem_fit(
            &Dataset::new(x, y).unwrap(),
            &MlpSpec::tandem_default(4, 6),
            Seed(s),
        )
        .map_err(|e| e.to_string())?;
        let tx = autotandem::samplers::random_sample(&prob.bounds, 500, Seed(2000 + s))
            .unwrap()
            .points;
        let ty = prob.evaluate_rows(tx.view()).unwrap();
        scores.push(
            validate_inverse(&t, &prob, &TestSet { tx, ty })
                .map_err(|e| e.to_string())?
                .r2,
        );
    }
    let text = scores
        .iter()
        .map(|r| format!("{r:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(
        scores.iter().all(|&r| r > 0.9),
        format!("inverse R² per seed: {text}"),
    )?;
    Ok(format!("inverse R² per seed: {text}"))
}

// 7 and 8. Scaled SBR pipeline through the CLI ------------------------------------

struct CliRun {
    dir: PathBuf,
    stderr: String,
    elapsed: Duration,
}

fn cli_run(dir: &Path) -> Result<CliRun, String> {
    let _ = fs::remove_dir_all(dir);
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_autotandem"))
        .args([
            "run",
            "--benchmark",
            "sbr",
            "--methods",
            "al,lhs",
            "--n-max",
            "100",
            "--reps",
            "5",
            "--out",
        ])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    if !out.status.success() {
        return Err(format!("autotandem run failed: {stderr}"));
    }
    Ok(CliRun {
        dir: dir.to_owned(),
        stderr,
        elapsed: start.elapsed(),
    })
}

fn criterion_7(runs: &Result<(CliRun, CliRun), String>) -> Outcome {
    let (a, b) = runs.as_ref().map_err(Clone::clone)?;
    let text = fs::read_to_string(a.dir.join("records.jsonl")).map_err(|e| e.to_string())?;
    let records: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    check(records.len() == 10, format!("{} records", records.len()))?;
    for r in &records {
        check(r["status"] == "ok", format!("failed record: {r}"))?;
        for k in ["rmse", "r2", "nmae"] {
            check(
                r["inverse_metrics"][k].as_f64().is_some_and(f64::is_finite),
                format!("non-finite inverse {k}"),
            )?;
        }
    }
    let again = fs::read(b.dir.join("records.jsonl")).map_err(|e| e.to_string())?;
    check(
        again == text.as_bytes(),
        "records.jsonl differs between reruns",
    )?;
    let summary = fs::read_to_string(a.dir.join("summary.csv")).map_err(|e| e.to_string())?;
    let mut al_std = Vec::new();
    for line in summary.lines().filter(|l| l.starts_with("al,inverse_")) {
        let cols: Vec<&str> = line.split(',').collect();
        let std: f64 = cols[3]
            .parse()
            .map_err(|_| format!("std column missing: {line}"))?;
        al_std.push(format!(
            "{}={std:.4}",
            cols[1].trim_start_matches("inverse_")
        ));
    }
    check(al_std.len() == 3, "AL inverse std rows missing")?;
    for line in a.stderr.lines().filter(|l| l.starts_with("al vs lhs")) {
        println!("    {line}");
    }
    let slowest = a.elapsed.max(b.elapsed);
    check(
        slowest < Duration::from_secs(30 * 60),
        format!("run took {:.0}s", slowest.as_secs_f64()),
    )?;
    Ok(format!(
        "10 finite records, bit-identical rerun, AL inverse std {}; runs {:.0}s / {:.0}s",
        al_std.join(" "),
        a.elapsed.as_secs_f64(),
        b.elapsed.as_secs_f64()
    ))
}

fn criterion_8(runs: &Result<(CliRun, CliRun), String>) -> Outcome {
    let (a, b) = runs.as_ref().map_err(Clone::clone)?;
    let sa = fs::read(a.dir.join("summary.csv")).map_err(|e| e.to_string())?;
    let sb = fs::read(b.dir.join("summary.csv")).map_err(|e| e.to_string())?;
    check(sa == sb, "summary.csv differs")?;
    Ok(format!("summary.csv identical ({} bytes)", sa.len()))
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let within = elapsed <= budget;
    let (ok, detail) = match outcome {
        Ok(d) if within => (true, d),
        Ok(d) => (
            false,
            format!("{d}; over the {:.0}s budget", budget.as_secs_f64()),
        ),
        Err(e) => (false, e),
    };
    println!(
        "{} criterion {id} ({name}) [{:.2}s]: {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= report(1, "metric oracles", secs(1), criterion_1);
    ok &= report(2, "gradient checks", secs(5), criterion_2);
    ok &= report(3, "PDE solver", secs(10), criterion_3);
    ok &= report(4, "sampler properties", secs(5), criterion_4);
    ok &= report(5, "active-learning budget", secs(120), criterion_5);
    ok &= report(6, "affine end-to-end", secs(120), criterion_6);

    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let runs =
        cli_run(&root.join("run1")).and_then(|a| cli_run(&root.join("run2")).map(|b| (a, b)));
    // Each CLI run has its own 30-minute limit, checked inside criterion 7.
    ok &= report(7, "scaled SBR pipeline", secs(u64::MAX / 4), || {
        criterion_7(&runs)
    });
    ok &= report(8, "determinism", secs(u64::MAX / 4), || criterion_8(&runs));

    if !ok {
        std::process::exit(1);
    }
}
