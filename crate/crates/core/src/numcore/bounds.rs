use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Per-dimension box `[lower_i, upper_i]` describing a design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoundsBox<T: Real> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoundsBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                context: "bounds",
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Empty("bounds"));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) || l > u {
                return Err(Error::Config(format!("bounds dimension {i}: [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Same interval repeated `dim` times.
    pub fn uniform(dim: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v >= l && v <= u)
    }

    /// Clamps `x` in place, returning how many components moved.
    pub fn clamp(&self, x: &mut [T]) -> usize {
        let mut moved = 0;
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            let c = v.max(*l).min(*u);
            if c != *v {
                moved += 1;
            }
            *v = c;
        }
        moved
    }

    /// Maps a unit-cube coordinate into the box.
    pub fn from_unit(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .enumerate()
            .map(|(i, &t)| (self.lower[i] + t * self.width(i)).min(self.upper[i]))
            .collect()
    }

    /// Maps a point to unit-cube coordinates; zero-width dimensions map to 0.
    pub fn to_unit(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = self.width(i);
                if w > T::zero() {
                    (v - self.lower[i]) / w
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}
