//! Versioned JSON persistence for trained models.
//!
//! Every document is an envelope
//! `{"format": "autotandem-model", "version": 1, "scalar": "f64", "kind": ..., "model": ...}`.
//! Dense layers are stored input side first; each weight matrix is written as
//! `{"rows": fan_in, "cols": fan_out, "data": [...]}` in row-major order, so
//! `data[i * cols + j]` connects input unit `i` to output unit `j`. Trees are
//! stored as parallel node arrays (see [`crate::surrogates::RegressionTree`]).

use std::any::type_name;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nn::{MlpModel, TandemModel};
use crate::surrogates::{EnsembleModel, ForestModel};
use crate::{Error, Real, Result};

pub const FORMAT_NAME: &str = "autotandem-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case", bound = "")]
pub enum ModelBody<T: Real> {
    Mlp(MlpModel<T>),
    Tandem(TandemModel<T>),
    Ensemble(EnsembleModel<T>),
    Forest(ForestModel<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelDocument<T: Real> {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    #[serde(flatten)]
    pub body: ModelBody<T>,
}

fn scalar_name<T: Real>() -> String {
    type_name::<T>()
        .rsplit("::")
        .next()
        .unwrap_or("f64")
        .to_owned()
}

impl<T: Real> ModelDocument<T> {
    pub fn new(body: ModelBody<T>) -> Self {
        Self {
            format: FORMAT_NAME.to_owned(),
            version: FORMAT_VERSION,
            scalar: scalar_name::<T>(),
            body,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format != FORMAT_NAME {
            return Err(Error::Format(format!("unexpected format `{}`", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        match &doc.body {
            ModelBody::Mlp(m) => m.check_shapes()?,
            ModelBody::Tandem(t) => {
                t.forward_net.check_shapes()?;
                t.inverse_net.check_shapes()?;
            }
            ModelBody::Ensemble(e) => {
                for m in &e.members {
                    m.net.check_shapes()?;
                }
            }
            ModelBody::Forest(_) => {}
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Serde adapter writing an `Array2` as `{rows, cols, data}` in row-major order.
pub mod flat_matrix {
    use ndarray::Array2;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Real;

    #[derive(Serialize, Deserialize)]
    #[serde(bound = "")]
    struct Flat<T: Real> {
        rows: usize,
        cols: usize,
        data: Vec<T>,
    }

    pub fn serialize<T: Real, S: Serializer>(m: &Array2<T>, s: S) -> Result<S::Ok, S::Error> {
        Flat {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.iter().copied().collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, T: Real, D: Deserializer<'de>>(d: D) -> Result<Array2<T>, D::Error> {
        let f = Flat::<T>::deserialize(d)?;
        Array2::from_shape_vec((f.rows, f.cols), f.data).map_err(serde::de::Error::custom)
    }
}
