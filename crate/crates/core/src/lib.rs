//! Multi-criteria item-based collaborative filtering.
//!
//! Ratings are held in sparse [`model::Dataset`]s (one criterion) or
//! [`model::CriteriaTensor`]s (overall plus k criteria). [`linalg`] provides
//! the randomized SVD, PCA and HOSVD used to denoise them, [`similarity`] the
//! item-item measures, [`engine`] neighborhood prediction and the
//! multi-criteria pipeline, and [`eval`] the metrics and benchmark harness.

pub mod engine;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod similarity;
pub mod synthetic;

pub use error::{Error, Result};
