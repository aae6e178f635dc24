//! Ernest-style parametric runtime model:
//! `runtime = θ0 + θ1·(scale/machines) + θ2·ln(machines) + θ3·machines`, θ ≥ 0.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::nnls::nnls;
use super::{Prediction, MIN_RUNTIME};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trace_io::TraceDataset;

pub const FEATURE_MAP: &str = "ernest-v1";

/// `[1, scale/machines, ln(machines), machines]`.
pub fn ernest_features<T: Scalar>(machines: T, scale: T) -> Result<[T; 4]> {
    if !(machines >= T::one()) {
        return Err(Error::Domain(format!("machine count must be at least 1, got {machines}")));
    }
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    Ok([T::one(), scale / machines, machines.ln(), machines])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ErnestModel<T: Scalar = f64> {
    pub theta: [T; 4],
    pub feature_map: String,
    pub scale_attribute: String,
    pub machines_attribute: String,
}

impl<T: Scalar> ErnestModel<T> {
    pub fn new(theta: [T; 4], scale_attribute: impl Into<String>, machines_attribute: impl Into<String>) -> Result<Self> {
        if theta.iter().any(|&t| !(t >= T::zero()) || !t.is_finite()) {
            return Err(Error::Domain("Ernest coefficients must be finite and non-negative".into()));
        }
        Ok(Self {
            theta,
            feature_map: FEATURE_MAP.into(),
            scale_attribute: scale_attribute.into(),
            machines_attribute: machines_attribute.into(),
        })
    }

    /// Fits θ by NNLS against the runtimes of `train`.
    pub fn fit(train: &TraceDataset, scale_attr: &str, machines_attr: &str) -> Result<Self> {
        let (machines, scale) = Self::inputs(train, scale_attr, machines_attr)?;
        let mut rows = Vec::with_capacity(train.len());
        for (&m, &s) in machines.iter().zip(&scale) {
            rows.push(ernest_features(m, s)?);
        }
        let design = Matrix::from_rows(&rows)?;
        let target: Vec<T> = train.targets().into_iter().map(T::of).collect();
        let x = nnls(&design, &target)?;
        let theta = [x[0], x[1], x[2], x[3]];
        Self::new(theta, scale_attr, machines_attr)
    }

    fn inputs(data: &TraceDataset, scale_attr: &str, machines_attr: &str) -> Result<(Vec<T>, Vec<T>)> {
        let column = |name: &str| -> Result<Vec<T>> {
            let idx = data.schema().index_of(name).ok_or_else(|| Error::SchemaMismatch {
                column: name.to_string(),
            })?;
            let values = data.numeric_column(idx).ok_or_else(|| Error::SchemaMismatch {
                column: name.to_string(),
            })?;
            Ok(values.into_iter().map(T::of).collect())
        };
        Ok((column(machines_attr)?, column(scale_attr)?))
    }

    /// Raw closed-form value, before the positivity floor.
    pub fn evaluate(&self, machines: T, scale: T) -> Result<T> {
        let f = ernest_features(machines, scale)?;
        Ok(f.iter().zip(&self.theta).map(|(&a, &b)| a * b).sum())
    }

    pub fn predict_one(&self, machines: T, scale: T) -> Result<T> {
        Ok(self.evaluate(machines, scale)?.max(T::of(MIN_RUNTIME)))
    }

    pub fn predict(&self, data: &TraceDataset) -> Result<Vec<Prediction>> {
        let (machines, scale) = Self::inputs(data, &self.scale_attribute, &self.machines_attribute)?;
        machines
            .iter()
            .zip(&scale)
            .map(|(&m, &s)| Ok(Prediction::new(self.evaluate(m, s)?.as_f64())))
            .collect()
    }
}

/// Fits an `f64` Ernest model.
pub fn fit_ernest(train: &TraceDataset, scale_attr: &str, machines_attr: &str) -> Result<ErnestModel<f64>> {
    ErnestModel::fit(train, scale_attr, machines_attr)
}
