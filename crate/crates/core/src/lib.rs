//! Differentially-private synthetic training data for runtime prediction of
//! distributed dataflow jobs.
//!
//! The pipeline: [`trace_io`] loads job traces, [`describer`] turns them into a
//! shareable [`DataSummary`], [`generator`] samples any number of synthetic rows
//! from it, [`models`] fits Ernest-style and gradient-boosted runtime models,
//! and [`experiments`] measures accuracy and synthesis overhead.
//!
//! The numeric kernels (NNLS, Ernest features, MAPE, information measures,
//! Laplace noise) are generic over [`Scalar`]; the aliases below fix them to
//! `f64` or `f32`.

pub mod describer;
pub mod error;
pub mod experiments;
pub mod generator;
mod io_util;
pub mod models;
pub mod scalar;
pub mod trace_io;

pub use describer::{describe, DataSummary, Epsilon, PrivacyParams};
pub use error::{Error, Result};
pub use generator::{empirical_marginal, sample};
pub use models::{mape, GbtModel, GbtParams, ModelKind, Prediction, RuntimeModel};
pub use scalar::Scalar;
pub use trace_io::{load_csv, sample_rows, split, AttributeKind, AttributeSpec, Role, Schema, TraceDataset, Value};

pub use io_util::write_atomic;

pub type Real = f64;
pub type ErnestModel = models::ErnestModel<f64>;
pub type ErnestModel32 = models::ErnestModel<f32>;
pub type Nnls = models::NnlsSolver<f64>;
pub type Nnls32 = models::NnlsSolver<f32>;
pub type Matrix = models::Matrix<f64>;
pub type Laplace = describer::Laplace<f64>;
