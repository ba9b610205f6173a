//! Feature relevance intervals for linear classifiers: for every feature,
//! the range of absolute weights it takes across all L1-regularized linear
//! SVMs that are nearly as good as the best one, plus a permutation-based
//! noise threshold that sorts features into strongly relevant, weakly
//! relevant and irrelevant.

pub mod analysis;
pub mod baseline;
pub mod bounds;
pub mod classify;
pub mod data;
mod error;
pub mod evalharness;
pub mod lp;
pub mod metrics;
pub mod pool;

pub use analysis::{analyze, Analysis, AnalysisParams, AnalysisReport};
pub use error::AnalysisError;
