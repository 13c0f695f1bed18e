//! Scalar boundary reconstruction: transient diffusion on the unit square.
//!
//! `∂c/∂t = D ∇²c` is integrated with explicit Euler on a cell-centered
//! finite-volume grid from `c ≡ 0`. The top face carries a Dirichlet value
//! per column (the design vector); left, right and bottom faces are
//! zero-flux. The Dirichlet flux uses the half-cell distance between the
//! top cell center and the face.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

pub const GRID_CELLS: usize = 20;
pub const BC_LOWER: f64 = 0.0;
pub const BC_UPPER: f64 = 30.0;

/// Measurement abscissae; each is sampled at every ordinate in [`MEASUREMENT_Y`].
pub const MEASUREMENT_X: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const MEASUREMENT_Y: [f64; 6] = [0.15, 0.3, 0.45, 0.6, 0.75, 0.9];
pub const MEASUREMENT_COUNT: usize = MEASUREMENT_X.len() * MEASUREMENT_Y.len();

/// The 30 measurement locations, ordered by `y` then `x`.
pub fn measurement_points() -> Vec<(f64, f64)> {
    MEASUREMENT_Y
        .iter()
        .flat_map(|&y| MEASUREMENT_X.iter().map(move |&x| (x, y)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionGrid {
    pub nx: usize,
    pub ny: usize,
    pub diffusivity: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl Default for DiffusionGrid {
    fn default() -> Self {
        Self {
            nx: GRID_CELLS,
            ny: GRID_CELLS,
            diffusivity: 1.0,
            t_max: 0.1,
            dt: 1e-4,
        }
    }
}

impl DiffusionGrid {
    pub fn spacing(&self) -> f64 {
        1.0 / self.nx as f64
    }

    /// Largest step for which every update is a nonnegative combination of
    /// old values. The top-row closure weights the cell by `1 - 5r`, so the
    /// bound is `h² / (5 D)` rather than the interior `h² / (4 D)`.
    pub fn max_stable_dt(&self) -> f64 {
        let h = self.spacing();
        h * h / (5.0 * self.diffusivity)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nx != self.ny {
            return Err(Error::Config(format!(
                "grid must be square with >= 2 cells, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.diffusivity > 0.0 && self.t_max > 0.0 && self.dt > 0.0) {
            return Err(Error::Config(
                "diffusivity, t_max and dt must be positive".into(),
            ));
        }
        if self.dt > self.max_stable_dt() {
            return Err(Error::Config(format!(
                "dt = {} exceeds the explicit stability limit {}",
                self.dt,
                self.max_stable_dt()
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt) - 1e-9).ceil() as usize
    }

    /// Field at `t_max`, indexed `[row, column]` with row 0 at the bottom.
    pub fn solve<T: Real>(&self, bc_top: &[T]) -> Result<Array2<T>> {
        self.validate()?;
        let (nx, ny) = (self.nx, self.ny);
        if bc_top.len() != nx {
            return Err(Error::Dimension {
                context: "top boundary values",
                expected: nx,
                got: bc_top.len(),
            });
        }
        if let Some(v) = bc_top.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("boundary value {v}")));
        }
        let steps = self.steps();
        let dt = self.t_max / steps as f64;
        let h = self.spacing();
        let r = T::lit(self.diffusivity * dt / (h * h));
        let two = T::lit(2.0);
        let four = T::lit(4.0);

        let mut c = vec![T::zero(); nx * ny];
        let mut next = c.clone();
        for _ in 0..steps {
            for j in 0..ny {
                for i in 0..nx {
                    let k = j * nx + i;
                    let cp = c[k];
                    // zero-flux faces mirror the cell value
                    let cl = if i > 0 { c[k - 1] } else { cp };
                    let cr = if i + 1 < nx { c[k + 1] } else { cp };
                    let cd = if j > 0 { c[k - nx] } else { cp };
                    let cu = if j + 1 < ny {
                        c[k + nx]
                    } else {
                        two * bc_top[i] - cp
                    };
                    next[k] = cp + r * ((cl + cr) + (cd + cu) - four * cp);
                }
            }
            std::mem::swap(&mut c, &mut next);
        }
        Ok(Array2::from_shape_vec((ny, nx), c).expect("grid size"))
    }
}

/// Solves on the default 20×20 grid.
pub fn sbr_solve<T: Real>(bc_top: &[T]) -> Result<Array2<T>> {
    DiffusionGrid::default().solve(bc_top)
}

fn locate(coord: f64, cells: usize) -> (usize, f64) {
    let f = coord * cells as f64 - 0.5;
    let i0 = (f.floor().max(0.0) as usize).min(cells - 2);
    let mut t = (f - i0 as f64).clamp(0.0, 1.0);
    if t < 1e-12 {
        t = 0.0;
    } else if t > 1.0 - 1e-12 {
        t = 1.0;
    }
    (i0, t)
}

/// Bilinear interpolation between cell centers; points outside the hull of
/// centers take the nearest edge value.
pub fn bilinear_at<T: Real>(field: &Array2<T>, x: f64, y: f64) -> T {
    let (ny, nx) = field.dim();
    let (i0, tx) = locate(x, nx);
    let (j0, ty) = locate(y, ny);
    let (tx, ty) = (T::lit(tx), T::lit(ty));
    let one = T::one();
    let bottom = field[[j0, i0]] * (one - tx) + field[[j0, i0 + 1]] * tx;
    let top = field[[j0 + 1, i0]] * (one - tx) + field[[j0 + 1, i0 + 1]] * tx;
    bottom * (one - ty) + top * ty
}

pub fn sbr_measure<T: Real>(field: &Array2<T>) -> Vec<T> {
    measurement_points()
        .into_iter()
        .map(|(x, y)| bilinear_at(field, x, y))
        .collect()
}
