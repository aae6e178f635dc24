//! Runtime prediction models and the MAPE metric.

mod ernest;
mod gbt;
mod mape;
mod matrix;
mod nnls;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ernest::{ernest_features, fit_ernest, ErnestModel, FEATURE_MAP};
pub use gbt::{fit_gbt, FeatureInfo, GbtModel, GbtParams, Node, SplitTest, Tree};
pub use mape::mape;
pub use matrix::Matrix;
pub use nnls::{kkt_violation, nnls, NnlsSolver};

use crate::error::{Error, Result};
use crate::trace_io::TraceDataset;

/// Floor applied to every predicted runtime, in seconds.
pub const MIN_RUNTIME: f64 = 1e-6;
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Predicted runtime in seconds, never below [`MIN_RUNTIME`].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Prediction(f64);

impl Prediction {
    pub fn new(raw: f64) -> Self {
        Self(if raw.is_nan() { MIN_RUNTIME } else { raw.max(MIN_RUNTIME) })
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ernest,
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Ernest, ModelKind::Gbt];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ernest => "ernest",
            ModelKind::Gbt => "gbt",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ernest" => Ok(ModelKind::Ernest),
            "gbt" => Ok(ModelKind::Gbt),
            other => Err(Error::Domain(format!("unknown model kind `{other}`"))),
        }
    }
}

/// A fitted model of either kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum RuntimeModel {
    Ernest(ErnestModel<f64>),
    Gbt(GbtModel),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: RuntimeModel,
}

impl RuntimeModel {
    /// Fits a model of `kind`; Ernest reads its two inputs from the schema's
    /// `ernest` column mapping.
    pub fn fit(kind: ModelKind, train: &TraceDataset, gbt: &GbtParams, seed: u64) -> Result<Self> {
        match kind {
            ModelKind::Ernest => {
                let cols = train.schema().ernest().ok_or_else(|| {
                    Error::InvalidSchema("schema has no `ernest` column mapping".into())
                })?;
                Ok(RuntimeModel::Ernest(fit_ernest(train, &cols.scale, &cols.machines)?))
            }
            ModelKind::Gbt => Ok(RuntimeModel::Gbt(fit_gbt(train, gbt, seed)?)),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            RuntimeModel::Ernest(_) => ModelKind::Ernest,
            RuntimeModel::Gbt(_) => ModelKind::Gbt,
        }
    }

    pub fn predict(&self, data: &TraceDataset) -> Result<Vec<Prediction>> {
        match self {
            RuntimeModel::Ernest(m) => m.predict(data),
            RuntimeModel::Gbt(m) => m.predict(data),
        }
    }

    /// MAPE of this model's predictions against `data`'s runtimes.
    pub fn evaluate(&self, data: &TraceDataset) -> Result<f64> {
        let predicted: Vec<f64> = self.predict(data)?.into_iter().map(Prediction::seconds).collect();
        mape(&predicted, &data.targets())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            other => {
                return Err(Error::Format(format!(
                    "model format_version {other:?} is not supported (expected {MODEL_FORMAT_VERSION})"
                )))
            }
        }
        let file: ModelFile = serde_json::from_value(raw)?;
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io_util::write_atomic(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
