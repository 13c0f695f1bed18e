use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Mean, population standard deviation and extrema of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SummaryStats<T: Real> {
    pub mean: T,
    pub std: T,
    pub max: T,
    pub min: T,
}

pub fn summarize<T: Real>(values: &[T]) -> Result<SummaryStats<T>> {
    if values.is_empty() {
        return Err(Error::Empty("summarize"));
    }
    let n = T::from_usize_lossy(values.len());
    let min = values.iter().copied().fold(T::infinity(), T::min);
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    let mean = (values.iter().copied().sum::<T>() / n).max(min).min(max);
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    Ok(SummaryStats {
        mean,
        std: var.sqrt(),
        max,
        min,
    })
}

/// Population mean and standard deviation per column of equally long rows.
pub fn mean_std_columns<T: Real>(rows: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let p = rows.first().map_or(0, Vec::len);
    let n = T::from_usize_lossy(rows.len().max(1));
    let mut mean = vec![T::zero(); p];
    for r in rows {
        for (m, &v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![T::zero(); p];
    for r in rows {
        for ((s, &v), &m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    (mean, std)
}
