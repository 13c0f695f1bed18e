//! Column-wise min-max scaling to `[0, 1]`.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScalerParams<T: Real> {
    pub col_min: Vec<T>,
    pub col_max: Vec<T>,
}

pub fn minmax_fit<T: Real>(data: ArrayView2<'_, T>) -> Result<ScalerParams<T>> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::Empty("minmax_fit"));
    }
    let mut col_min = Vec::with_capacity(data.ncols());
    let mut col_max = Vec::with_capacity(data.ncols());
    for col in data.axis_iter(Axis(1)) {
        let (lo, hi) = col
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        col_min.push(lo);
        col_max.push(hi);
    }
    Ok(ScalerParams { col_min, col_max })
}

impl<T: Real> ScalerParams<T> {
    /// Identity-range scaler (`min = 0`, `max = 1`) of the given width.
    pub fn unit(dim: usize) -> Self {
        Self {
            col_min: vec![T::zero(); dim],
            col_max: vec![T::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.col_min.len()
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::Dimension {
                context: "scaler",
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    #[inline]
    fn fwd(&self, j: usize, v: T) -> T {
        let span = self.col_max[j] - self.col_min[j];
        if span > T::zero() {
            (v - self.col_min[j]) / span
        } else {
            T::zero()
        }
    }

    #[inline]
    fn inv(&self, j: usize, z: T) -> T {
        self.col_min[j] + z * (self.col_max[j] - self.col_min[j])
    }

    pub fn transform(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x.len())?;
        Ok(x.iter().enumerate().map(|(j, &v)| self.fwd(j, v)).collect())
    }

    pub fn inverse(&self, z: &[T]) -> Result<Vec<T>> {
        self.check(z.len())?;
        Ok(z.iter().enumerate().map(|(j, &v)| self.inv(j, v)).collect())
    }

    pub fn transform_matrix(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check(x.ncols())?;
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.fwd(j, *v);
            }
        }
        Ok(out)
    }

    pub fn inverse_matrix(&self, z: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.check(z.ncols())?;
        let mut out = z.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.inv(j, *v);
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`ScalerParams::transform`].
pub fn minmax_transform<T: Real>(x: &[T], s: &ScalerParams<T>) -> Result<Vec<T>> {
    s.transform(x)
}

/// Free-function form of [`ScalerParams::inverse`].
pub fn minmax_inverse<T: Real>(z: &[T], s: &ScalerParams<T>) -> Result<Vec<T>> {
    s.inverse(z)
}
