//! End-to-end relevance analysis of one dataset and its JSON report.

use serde::{Deserialize, Serialize};

use crate::baseline::{self, BaselineModel, CvReport};
use crate::bounds::{self, ConstraintSet, RelevanceIntervals};
use crate::classify::{
    self, PredictionInterval, ProbeResult, RelevanceClass, RelevanceClasses,
};
use crate::data::Dataset;
use crate::error::AnalysisError;
use crate::pool::WorkerPool;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub delta: f64,
    /// Coverage of the probe prediction interval.
    pub coverage: f64,
    pub n_probes: usize,
    pub seed: u64,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub strong_tolerance: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            delta: bounds::DEFAULT_DELTA,
            coverage: classify::DEFAULT_COVERAGE,
            n_probes: classify::DEFAULT_PROBES,
            seed: 0,
            c_grid: baseline::default_c_grid(),
            folds: baseline::DEFAULT_FOLDS,
            strong_tolerance: classify::DEFAULT_STRONG_TOLERANCE,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: String| Err(AnalysisError::InvalidParameter(m));
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if !(self.coverage > 0.5 && self.coverage < 1.0) {
            return bad(format!("coverage must lie in (0.5, 1), got {}", self.coverage));
        }
        if self.n_probes < 2 {
            return bad(format!("need at least 2 probes, got {}", self.n_probes));
        }
        if self.folds < 2 {
            return bad(format!("need at least 2 folds, got {}", self.folds));
        }
        if !(self.strong_tolerance.is_finite() && self.strong_tolerance >= 0.0) {
            return bad(format!("strong tolerance must be >= 0, got {}", self.strong_tolerance));
        }
        Ok(())
    }
}

/// Everything computed for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub params: AnalysisParams,
    pub baseline: BaselineModel,
    pub cv: CvReport,
    pub intervals: RelevanceIntervals,
    pub probes: ProbeResult,
    pub interval: PredictionInterval,
    pub classes: RelevanceClasses,
}

/// Standardizes (unless already standardized), selects `C`, fits the
/// baseline, bounds every feature, estimates the noise threshold with
/// probes and classifies.
pub fn analyze(
    dataset: &Dataset,
    params: &AnalysisParams,
    pool: &WorkerPool,
) -> Result<Analysis, AnalysisError> {
    params.validate()?;
    let data = prepare(dataset);
    let (baseline, cv) =
        baseline::fit_selected(&data, &params.c_grid, params.folds, params.seed, pool)?;
    let intervals =
        bounds::compute_all(&data, &baseline, params.delta, &ConstraintSet::new(), pool)?;
    let probes =
        classify::generate_probes(&data, &baseline, params.n_probes, params.delta, params.seed, pool)?;
    let interval = classify::prediction_interval(&probes.values, params.coverage)?;
    let classes = classify::classify_features(&intervals, &interval, params.strong_tolerance);
    Ok(Analysis { params: params.clone(), baseline, cv, intervals, probes, interval, classes })
}

fn prepare(dataset: &Dataset) -> Dataset {
    if dataset.is_standardized() {
        dataset.clone()
    } else {
        dataset.standardize()
    }
}

/// Bounds and classes under user constraints, reusing the baseline and
/// noise threshold of an unconstrained analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedAnalysis {
    pub constraints: ConstraintSet,
    pub intervals: RelevanceIntervals,
    pub classes: RelevanceClasses,
}

impl Analysis {
    pub fn constrained(
        &self,
        dataset: &Dataset,
        constraints: &ConstraintSet,
        pool: &WorkerPool,
    ) -> Result<ConstrainedAnalysis, AnalysisError> {
        let data = prepare(dataset);
        let intervals =
            bounds::compute_all(&data, &self.baseline, self.params.delta, constraints, pool)?;
        let classes =
            classify::classify_features(&intervals, &self.interval, self.params.strong_tolerance);
        Ok(ConstrainedAnalysis { constraints: constraints.clone(), intervals, classes })
    }

    pub fn report(&self) -> AnalysisReport {
        AnalysisReport::new(&self.baseline, &self.intervals, &self.classes)
    }
}

impl ConstrainedAnalysis {
    pub fn report(&self, baseline: &BaselineModel) -> AnalysisReport {
        AnalysisReport::new(baseline, &self.intervals, &self.classes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    #[serde(rename = "C")]
    pub c: f64,
    pub mu: f64,
    pub rho: f64,
    pub cv_score: Option<f64>,
}

impl From<&BaselineModel> for BaselineSummary {
    fn from(m: &BaselineModel) -> Self {
        Self { c: m.c, mu: m.mu, rho: m.rho, cv_score: m.cv_score }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub lower_norm: f64,
    pub upper_norm: f64,
    pub class: RelevanceClass,
}

/// Versioned result document shared by the command line and the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub baseline: BaselineSummary,
    pub threshold: f64,
    pub features: Vec<FeatureReport>,
}

impl AnalysisReport {
    pub fn new(
        baseline: &BaselineModel,
        intervals: &RelevanceIntervals,
        classes: &RelevanceClasses,
    ) -> Self {
        let features = (0..intervals.len())
            .map(|j| FeatureReport {
                name: intervals.feature_names[j].clone(),
                lower: intervals.lower[j],
                upper: intervals.upper[j],
                lower_norm: intervals.normalize(intervals.lower[j]),
                upper_norm: intervals.normalize(intervals.upper[j]),
                class: classes.classes[j],
            })
            .collect();
        Self {
            schema: REPORT_SCHEMA,
            baseline: baseline.into(),
            threshold: classes.threshold,
            features,
        }
    }

    pub fn count(&self, class: RelevanceClass) -> usize {
        self.features.iter().filter(|f| f.class == class).count()
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
