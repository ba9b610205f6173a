//! L1-regularized soft-margin linear SVM, solved as a linear program, and
//! cross-validated selection of the regularization constant.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::{stratified_kfold, Dataset};
use crate::error::AnalysisError;
use crate::lp::{self, ConstraintSense, LpProblem};
use crate::metrics;
use crate::pool::WorkerPool;

/// Fitted baseline classifier and the budgets it defines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub slacks: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    /// L1 norm of `weights`.
    pub mu: f64,
    /// Sum of `slacks`.
    pub rho: f64,
    pub cv_score: Option<f64>,
}

impl BaselineModel {
    pub fn decision_value(&self, x: ArrayView1<f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() - self.bias
    }

    /// Sign of the decision value; zero maps to `+1`.
    pub fn predict(&self, samples: &Array2<f64>) -> Result<Vec<f64>, AnalysisError> {
        if samples.ncols() != self.weights.len() {
            return Err(AnalysisError::Dimension(format!(
                "model has {} weights, samples have {} columns",
                self.weights.len(),
                samples.ncols()
            )));
        }
        Ok(samples
            .rows()
            .into_iter()
            .map(|x| if self.decision_value(x) >= 0.0 { 1.0 } else { -1.0 })
            .collect())
    }

    pub fn training_accuracy(&self, dataset: &Dataset) -> Result<f64, AnalysisError> {
        let pred = self.predict(dataset.samples())?;
        Ok(metrics::accuracy(dataset.labels(), &pred))
    }
}

/// Free function form of [`BaselineModel::predict`].
pub fn predict(model: &BaselineModel, samples: &Array2<f64>) -> Result<Vec<f64>, AnalysisError> {
    model.predict(samples)
}

/// Cross-validation scores per candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub grid: Vec<f64>,
    pub scores: Vec<f64>,
    pub chosen_c: f64,
    pub chosen_score: f64,
}

/// Ten log-spaced values from `1e-3` to `1e3`.
pub fn default_c_grid() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 9.0)).collect()
}

pub const DEFAULT_FOLDS: usize = 3;

/// Variable layout: positive weight parts, negative weight parts, bias,
/// slacks.
pub(crate) fn fit_problem(dataset: &Dataset, c: f64) -> Result<LpProblem, AnalysisError> {
    let (n, d) = dataset.samples().dim();
    let bias = 2 * d;
    let slack = 2 * d + 1;
    let mut b = LpProblem::builder(2 * d + 1 + n);
    for j in 0..2 * d {
        b.cost(j, 1.0);
    }
    b.free(bias);
    for i in 0..n {
        b.cost(slack + i, c);
    }
    for (i, (row, &y)) in dataset.samples().rows().into_iter().zip(dataset.labels()).enumerate() {
        let mut terms = Vec::with_capacity(2 * d + 2);
        for (j, &x) in row.iter().enumerate() {
            if x != 0.0 {
                terms.push((j, y * x));
                terms.push((d + j, -y * x));
            }
        }
        terms.push((bias, -y));
        terms.push((slack + i, 1.0));
        b.row(terms, ConstraintSense::GreaterEq, 1.0);
    }
    Ok(b.build()?)
}

/// Hinge slacks `max(0, 1 - y (w·x - b))` recomputed from a weight vector.
pub(crate) fn hinge_slacks(dataset: &Dataset, weights: &[f64], bias: f64) -> Vec<f64> {
    dataset
        .samples()
        .rows()
        .into_iter()
        .zip(dataset.labels())
        .map(|(x, &y)| {
            let v: f64 = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() - bias;
            (1.0 - y * v).max(0.0)
        })
        .collect()
}

pub fn fit_l1_svm(dataset: &Dataset, c: f64) -> Result<BaselineModel, AnalysisError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if !dataset.is_standardized() {
        return Err(AnalysisError::InvalidParameter(
            "the baseline expects a standardized dataset".into(),
        ));
    }
    let d = dataset.n_features();
    let problem = fit_problem(dataset, c)?;
    let sol = lp::solve(&problem, lp::DEFAULT_TOLERANCE)?;
    // Slacks keep the program feasible and the objective is bounded below,
    // so anything but an optimum is a solver breakdown.
    let Some((_, x)) = sol.optimum() else {
        return Err(AnalysisError::Optimization(lp::LpError::NumericalFailure {
            iterations: sol.iterations,
        }));
    };
    let weights: Vec<f64> = (0..d).map(|j| x[j] - x[d + j]).collect();
    let bias = x[2 * d];
    let slacks = hinge_slacks(dataset, &weights, bias);
    let mu = weights.iter().map(|w| w.abs()).sum();
    let rho = slacks.iter().sum();
    Ok(BaselineModel {
        weights,
        bias,
        slacks,
        c,
        mu,
        rho,
        cv_score: None,
    })
}

/// Mean weighted F1 over `k` stratified folds for every candidate; the best
/// mean wins and ties go to the smallest `C`.
pub fn select_c(
    dataset: &Dataset,
    grid: &[f64],
    k: usize,
    seed: u64,
    pool: &WorkerPool,
) -> Result<CvReport, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::InvalidParameter("C grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(AnalysisError::InvalidParameter(format!("C must be positive, got {bad}")));
    }
    let folds = stratified_kfold(dataset.labels(), k, seed)?;
    let splits = folds
        .iter()
        .map(|f| Ok((dataset.subset(&f.train)?, dataset.subset(&f.test)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..splits.len()).map(move |f| (g, f)))
        .collect();
    let fold_scores = pool.map(&jobs, |&(g, f)| {
        let (train, test) = &splits[f];
        let model = fit_l1_svm(train, grid[g])?;
        let pred = model.predict(test.samples())?;
        Ok::<f64, AnalysisError>(metrics::weighted_f1(test.labels(), &pred))
    });
    let fold_scores = fold_scores.into_iter().collect::<Result<Vec<_>, _>>()?;
    let scores: Vec<f64> = fold_scores
        .chunks(splits.len())
        .map(|s| s.iter().sum::<f64>() / s.len() as f64)
        .collect();
    let mut best = 0;
    for i in 1..grid.len() {
        let better = scores[i] > scores[best];
        let tie_smaller = scores[i] == scores[best] && grid[i] < grid[best];
        if better || tie_smaller {
            best = i;
        }
    }
    Ok(CvReport {
        grid: grid.to_vec(),
        chosen_c: grid[best],
        chosen_score: scores[best],
        scores,
    })
}

/// Cross-validates `C`, then refits on the full dataset.
pub fn fit_selected(
    dataset: &Dataset,
    grid: &[f64],
    k: usize,
    seed: u64,
    pool: &WorkerPool,
) -> Result<(BaselineModel, CvReport), AnalysisError> {
    let report = select_c(dataset, grid, k, seed, pool)?;
    let mut model = fit_l1_svm(dataset, report.chosen_c)?;
    model.cv_score = Some(report.chosen_score);
    Ok((model, report))
}
