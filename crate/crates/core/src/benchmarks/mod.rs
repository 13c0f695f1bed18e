//! High-fidelity benchmark problems and held-out test sets.

pub mod analytic;
pub mod sbr;

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use sha2::{Digest, Sha256};

use crate::numcore::{BoundsBox, Seed};
use crate::samplers::{random_sample, SampleBatch};
use crate::{Error, Real, Result};

pub use sbr::{bilinear_at, measurement_points, sbr_measure, sbr_solve, DiffusionGrid};

type Evaluator<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// A forward map `R^d -> R^p` on a bounded design space.
#[derive(Clone)]
pub struct BenchmarkProblem<T: Real> {
    pub name: String,
    pub dim_names: Vec<String>,
    pub output_dim: usize,
    pub bounds: BoundsBox<T>,
    evaluator: Evaluator<T>,
}

impl<T: Real> fmt::Debug for BenchmarkProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("name", &self.name)
            .field("d", &self.input_dim())
            .field("p", &self.output_dim)
            .finish()
    }
}

impl<T: Real> BenchmarkProblem<T> {
    pub fn new<F>(
        name: &str,
        dim_names: Vec<String>,
        bounds: BoundsBox<T>,
        output_dim: usize,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    {
        if dim_names.len() != bounds.dim() {
            return Err(Error::Dimension {
                context: "dimension names",
                expected: bounds.dim(),
                got: dim_names.len(),
            });
        }
        Ok(Self {
            name: name.to_owned(),
            dim_names,
            output_dim,
            bounds,
            evaluator: Arc::new(f),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        (self.evaluator)(x)
    }

    /// Evaluates every row, checking output length and finiteness.
    pub fn evaluate_rows(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                context: "problem input",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        crate::acquisition::label_rows(
            &|r: &[T]| self.evaluate(r),
            &x.to_owned(),
            Some(self.output_dim),
            0,
        )
    }

    pub fn output_names(&self) -> Vec<String> {
        (1..=self.output_dim).map(|j| format!("y{j}")).collect()
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Diffusion boundary reconstruction: 20 top-boundary values in `[0, 30]`
/// mapped to 30 interior measurements at `t = 0.1`.
pub fn sbr_problem<T: Real>() -> BenchmarkProblem<T> {
    let grid = DiffusionGrid::default();
    BenchmarkProblem::new(
        "sbr",
        names("c_bc", sbr::GRID_CELLS),
        BoundsBox::uniform(
            sbr::GRID_CELLS,
            T::lit(sbr::BC_LOWER),
            T::lit(sbr::BC_UPPER),
        )
        .expect("valid bounds"),
        sbr::MEASUREMENT_COUNT,
        move |x: &[T]| match grid.solve(x) {
            Ok(field) => sbr_measure(&field),
            Err(_) => vec![T::nan(); sbr::MEASUREMENT_COUNT],
        },
    )
    .expect("consistent definition")
}

pub fn aidlike_problem<T: Real>() -> BenchmarkProblem<T> {
    let lower = analytic::AID_LOWER.iter().map(|&v| T::lit(v)).collect();
    let upper = analytic::AID_UPPER.iter().map(|&v| T::lit(v)).collect();
    BenchmarkProblem::new(
        "aidlike",
        analytic::AID_NAMES.iter().map(|s| s.to_string()).collect(),
        BoundsBox::new(lower, upper).expect("valid bounds"),
        analytic::AID_OUTPUTS,
        analytic::aidlike_response::<T>,
    )
    .expect("consistent definition")
}

pub fn psidlike_problem<T: Real>() -> BenchmarkProblem<T> {
    let lower = analytic::PSID_LOWER.iter().map(|&v| T::lit(v)).collect();
    let upper = analytic::PSID_UPPER.iter().map(|&v| T::lit(v)).collect();
    BenchmarkProblem::new(
        "psidlike",
        analytic::PSID_NAMES.iter().map(|s| s.to_string()).collect(),
        BoundsBox::new(lower, upper).expect("valid bounds"),
        analytic::PSID_OUTPUTS,
        analytic::psidlike_response::<T>,
    )
    .expect("consistent definition")
}

pub const PROBLEM_NAMES: [&str; 3] = ["sbr", "aidlike", "psidlike"];

pub fn problem_by_name<T: Real>(name: &str) -> Result<BenchmarkProblem<T>> {
    match name.to_ascii_lowercase().as_str() {
        "sbr" => Ok(sbr_problem()),
        "aidlike" | "aid" => Ok(aidlike_problem()),
        "psidlike" | "psid" => Ok(psidlike_problem()),
        _ => Err(Error::Unknown {
            kind: "benchmark",
            name: name.to_owned(),
        }),
    }
}

/// Held-out pairs `(Tx, Ty)` with `Ty[i] = evaluate(Tx[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet<T: Real> {
    pub tx: Array2<T>,
    pub ty: Array2<T>,
}

/// Uniform random designs labeled through the problem. The design stream is
/// derived under its own label, so it never coincides with a training stream.
pub fn make_test_set<T: Real>(
    prob: &BenchmarkProblem<T>,
    n: usize,
    seed: Seed,
) -> Result<TestSet<T>> {
    let SampleBatch { points } = random_sample(&prob.bounds, n, seed.derive("test-set", 0))?;
    let ty = prob.evaluate_rows(points.view())?;
    Ok(TestSet { tx: points, ty })
}

fn matrix_csv<T: Real>(m: &Array2<T>, header: &[String]) -> String {
    SampleBatch { points: m.clone() }
        .to_csv(header)
        .expect("header width matches")
}

impl<T: Real> TestSet<T> {
    pub fn len(&self) -> usize {
        self.tx.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.tx.nrows() == 0
    }

    /// Writes `Tx.csv` and `Ty.csv` into `dir`, returning their SHA-256 digests.
    pub fn write_csv(&self, dir: &Path, prob: &BenchmarkProblem<T>) -> Result<(String, String)> {
        fs::create_dir_all(dir)?;
        let tx = matrix_csv(&self.tx, &prob.dim_names);
        let ty = matrix_csv(&self.ty, &prob.output_names());
        fs::write(dir.join("Tx.csv"), &tx)?;
        fs::write(dir.join("Ty.csv"), &ty)?;
        Ok((sha256_hex(tx.as_bytes()), sha256_hex(ty.as_bytes())))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_dimensions() {
        let dims = |p: BenchmarkProblem<f64>| (p.input_dim(), p.output_dim);
        assert_eq!(dims(sbr_problem()), (20, 30));
        assert_eq!(dims(aidlike_problem()), (5, 75));
        assert_eq!(dims(psidlike_problem()), (3, 822));
    }

    #[test]
    fn sbr_zero_input() {
        let p = sbr_problem::<f64>();
        assert_eq!(p.evaluate(&[0.0; 20]), vec![0.0; 30]);
    }

    #[test]
    fn registry() {
        for n in PROBLEM_NAMES {
            assert_eq!(problem_by_name::<f64>(n).unwrap().name, n);
        }
        assert!(problem_by_name::<f64>("xfoil").is_err());
    }

    #[test]
    fn test_set_rows_match_evaluation() {
        let p = aidlike_problem::<f64>();
        let ts = make_test_set(&p, 25, Seed(3)).unwrap();
        assert_eq!(ts.len(), 25);
        for i in 0..25 {
            let x = ts.tx.row(i).to_vec();
            assert!(p.bounds.contains(&x));
            assert_eq!(ts.ty.row(i).to_vec(), p.evaluate(&x));
        }
        let one = make_test_set(&p, 1, Seed(3)).unwrap();
        assert_eq!(one.len(), 1);
    }
}
