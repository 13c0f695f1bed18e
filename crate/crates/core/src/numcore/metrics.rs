//! Multi-output regression accuracy metrics: RMSE, pooled R², and NMAE.

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricsReport<T: Real> {
    pub rmse: T,
    pub r2: T,
    pub nmae: T,
}

impl<T: Real> MetricsReport<T> {
    pub fn evaluate(y: ArrayView2<'_, T>, yhat: ArrayView2<'_, T>) -> Result<Self> {
        Ok(Self {
            rmse: rmse(y, yhat)?,
            r2: r2(y, yhat)?,
            nmae: nmae(y, yhat)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.rmse.is_finite() && self.r2.is_finite() && self.nmae.is_finite()
    }
}

fn check_shapes<T>(
    y: &ArrayView2<'_, T>,
    yhat: &ArrayView2<'_, T>,
    ctx: &'static str,
) -> Result<()> {
    if y.dim() != yhat.dim() {
        return Err(Error::Shape {
            context: ctx,
            left: y.dim(),
            right: yhat.dim(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty(ctx));
    }
    Ok(())
}

fn column_means<T: Real>(y: &ArrayView2<'_, T>) -> Vec<T> {
    let n = T::from_usize_lossy(y.nrows());
    y.axis_iter(Axis(1))
        .map(|c| c.iter().copied().sum::<T>() / n)
        .collect()
}

pub fn rmse<T: Real>(y: ArrayView2<'_, T>, yhat: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(&y, &yhat, "rmse")?;
    let sse: T = y
        .iter()
        .zip(yhat.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok((sse / T::from_usize_lossy(y.len())).sqrt())
}

/// Pooled coefficient of determination: residual and total sums of squares
/// are each summed over every output column before dividing.
pub fn r2<T: Real>(y: ArrayView2<'_, T>, yhat: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(&y, &yhat, "r2")?;
    let means = column_means(&y);
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (row, prow) in y.rows().into_iter().zip(yhat.rows()) {
        for (j, (&a, &b)) in row.iter().zip(prow.iter()).enumerate() {
            ss_res += (a - b) * (a - b);
            ss_tot += (a - means[j]) * (a - means[j]);
        }
    }
    if ss_tot <= T::zero() {
        return Err(Error::ZeroVariance("r2"));
    }
    Ok(T::one() - ss_res / ss_tot)
}

/// Per-column worst absolute error over worst deviation from the column mean,
/// averaged across columns.
pub fn nmae<T: Real>(y: ArrayView2<'_, T>, yhat: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(&y, &yhat, "nmae")?;
    let means = column_means(&y);
    let mut total = T::zero();
    for (j, (col, pcol)) in y
        .axis_iter(Axis(1))
        .zip(yhat.axis_iter(Axis(1)))
        .enumerate()
    {
        let mut num = T::zero();
        let mut den = T::zero();
        for (&a, &b) in col.iter().zip(pcol.iter()) {
            num = num.max((a - b).abs());
            den = den.max((a - means[j]).abs());
        }
        if den <= T::zero() {
            return Err(Error::ZeroVariance("nmae"));
        }
        total += num / den;
    }
    Ok(total / T::from_usize_lossy(y.ncols()))
}
