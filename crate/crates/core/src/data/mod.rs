//! Labelled sample matrices, CSV ingestion, standardization, stratified
//! splitting and the ground-truth simulator.

mod csv_io;
mod folds;
mod simulate;

use std::path::PathBuf;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{load_csv, read_csv, write_csv, write_ground_truth, read_ground_truth};
pub use folds::{stratified_kfold, Fold};
pub use simulate::{default_weak_groups, simulate, GroundTruth, SimulationSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid simulation spec: {0}")]
    Spec(String),
    #[error("cannot build folds: {0}")]
    Fold(String),
}

/// `n × d` samples with `±1` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Array2<f64>,
    labels: Vec<f64>,
    feature_names: Vec<String>,
    standardized: bool,
    constant_columns: Vec<bool>,
}

impl Dataset {
    pub fn new(
        samples: Array2<f64>,
        labels: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let (n, d) = samples.dim();
        if labels.len() != n {
            return Err(DataError::Shape(format!("{n} samples but {} labels", labels.len())));
        }
        if feature_names.len() != d {
            return Err(DataError::Shape(format!(
                "{d} feature columns but {} names",
                feature_names.len()
            )));
        }
        if n < 2 {
            return Err(DataError::Shape(format!("need at least 2 samples, got {n}")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Parse("feature values must be finite".into()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(DataError::Label(format!("labels must be -1 or +1, found {bad}")));
        }
        if !labels.contains(&1.0) || !labels.contains(&-1.0) {
            return Err(DataError::Label("both label classes must be present".into()));
        }
        Ok(Self {
            samples,
            labels,
            feature_names,
            standardized: false,
            constant_columns: vec![false; d],
        })
    }

    /// Numbered names `f1 .. fd`.
    pub fn default_names(d: usize) -> Vec<String> {
        (1..=d).map(|j| format!("f{j}")).collect()
    }

    pub fn samples(&self) -> &Array2<f64> {
        &self.samples
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Columns with zero variance at standardization time.
    pub fn constant_columns(&self) -> &[bool] {
        &self.constant_columns
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, DataError> {
        let samples = self.samples.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::new(samples, labels, self.feature_names.clone())?;
        out.standardized = self.standardized;
        out.constant_columns = self.constant_columns.clone();
        Ok(out)
    }

    /// Appends one feature column.
    pub fn with_column(&self, name: &str, column: &[f64]) -> Result<Self, DataError> {
        if column.len() != self.n_samples() {
            return Err(DataError::Shape(format!(
                "column has {} values, dataset has {} samples",
                column.len(),
                self.n_samples()
            )));
        }
        let col = Array1::from(column.to_vec()).insert_axis(Axis(1));
        let samples = ndarray::concatenate![Axis(1), self.samples, col];
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        let mut constant = self.constant_columns.clone();
        constant.push(false);
        Ok(Self {
            samples,
            labels: self.labels.clone(),
            feature_names: names,
            standardized: self.standardized,
            constant_columns: constant,
        })
    }

    /// Z-scores every column (population standard deviation). Constant
    /// columns become all zeros and are flagged.
    pub fn standardize(&self) -> Dataset {
        self.standardize_with_params().0
    }

    /// Like [`Dataset::standardize`], also returning the column moments.
    pub fn standardize_with_params(&self) -> (Dataset, Standardization) {
        let n = self.n_samples() as f64;
        let d = self.n_features();
        let mut means = Vec::with_capacity(d);
        let mut sds = Vec::with_capacity(d);
        let mut constant = Vec::with_capacity(d);
        let mut samples = self.samples.clone();
        for mut col in samples.columns_mut() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            let is_const = sd <= 1e-12 * mean.abs().max(1.0);
            if is_const {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - mean) / sd);
            }
            means.push(mean);
            sds.push(if is_const { 0.0 } else { sd });
            constant.push(is_const);
        }
        let out = Dataset {
            samples,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
            standardized: true,
            constant_columns: constant,
        };
        (out, Standardization { means, sds })
    }
}

/// Column moments used by [`Dataset::standardize_with_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    /// Zero marks a constant column.
    pub sds: Vec<f64>,
}

impl Standardization {
    /// Maps standardized samples back to the original scale.
    pub fn invert(&self, standardized: &Array2<f64>) -> Array2<f64> {
        let mut out = standardized.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (mean, sd) = (self.means[j], self.sds[j]);
            col.mapv_inplace(|v| v * sd + mean);
        }
        out
    }
}
