//! Chronic liver-disease prediction pipeline.
//!
//! Raw ILPD records are imputed, balanced, augmented with a simulated
//! cohort, cleaned of outliers, reduced through an LDA/FA → t-SNE → UMAP
//! chain and finally scored with four classifiers under cross-validation and
//! a held-out split.

pub mod dataset;
pub mod dimred;
pub mod error;
pub mod eval;
pub mod models;
pub mod numerics;
pub mod pipeline;
pub mod preprocess;

pub use error::{Error, Result};
