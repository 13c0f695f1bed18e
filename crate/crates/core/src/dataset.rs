use ndarray::{concatenate, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Real, Result};

/// Paired design vectors (rows of `x`) and responses (rows of `y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LabeledDataset<T: Real> {
    pub x: Array2<T>,
    pub y: Array2<T>,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(x: Array2<T>, y: Array2<T>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension {
                context: "dataset rows",
                expected: x.nrows(),
                got: y.nrows(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.y.ncols()
    }

    /// Appends rows; dimensions must match.
    pub fn extend(&mut self, x: ArrayView2<'_, T>, y: ArrayView2<'_, T>) -> Result<()> {
        if x.ncols() != self.input_dim() || y.ncols() != self.output_dim() || x.nrows() != y.nrows()
        {
            return Err(Error::Shape {
                context: "dataset extend",
                left: x.dim(),
                right: y.dim(),
            });
        }
        self.x = concatenate(Axis(0), &[self.x.view(), x]).expect("column counts checked");
        self.y = concatenate(Axis(0), &[self.y.view(), y]).expect("column counts checked");
        Ok(())
    }

    pub fn row(&self, i: usize) -> (ArrayView1<'_, T>, ArrayView1<'_, T>) {
        (self.x.row(i), self.y.row(i))
    }

    /// SHA-256 over the shape and the little-endian `f64` image of every value.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for m in [&self.x, &self.y] {
            h.update((m.nrows() as u64).to_le_bytes());
            h.update((m.ncols() as u64).to_le_bytes());
            for v in m.iter() {
                h.update(v.as_f64().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
