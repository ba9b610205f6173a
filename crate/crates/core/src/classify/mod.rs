//! Noise-floor estimation with permutation probes and the three-way
//! relevance classification.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baseline::BaselineModel;
use crate::bounds::{max_rel, ConstraintSet, RelevanceIntervals};
use crate::data::Dataset;
use crate::error::AnalysisError;
use crate::pool::WorkerPool;

pub const DEFAULT_PROBES: usize = 50;
pub const DEFAULT_COVERAGE: f64 = 0.999;
/// Minimum normalized lower bound for a feature to count as strongly
/// relevant.
pub const DEFAULT_STRONG_TOLERANCE: f64 = 1e-4;
/// Largest tolerated share of failed probe solves.
const MAX_PROBE_FAILURE_SHARE: f64 = 0.1;

/// Relevance class, serialized as its integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelevanceClass {
    Irrelevant = 0,
    Weak = 1,
    Strong = 2,
}

impl RelevanceClass {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Irrelevant),
            1 => Some(Self::Weak),
            2 => Some(Self::Strong),
            _ => None,
        }
    }

    pub fn is_relevant(self) -> bool {
        self != Self::Irrelevant
    }
}

impl Serialize for RelevanceClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for RelevanceClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = u8::deserialize(d)?;
        Self::from_code(code)
            .ok_or_else(|| serde::de::Error::custom(format!("relevance class must be 0, 1 or 2, got {code}")))
    }
}

/// Maximum relevances of permuted copies of real features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub values: Vec<f64>,
    /// Probes requested; `values.len()` is smaller when some solves failed.
    pub n_probes: usize,
    pub failed: usize,
    pub seed: u64,
}

/// Appends a row-permuted copy of a randomly chosen feature to the dataset,
/// one probe at a time, and records its maximum relevance under the
/// baseline's budgets.
pub fn generate_probes(
    dataset: &Dataset,
    baseline: &BaselineModel,
    n_probes: usize,
    delta: f64,
    seed: u64,
    pool: &WorkerPool,
) -> Result<ProbeResult, AnalysisError> {
    if n_probes < 2 {
        return Err(AnalysisError::InvalidParameter(format!(
            "need at least 2 probes, got {n_probes}"
        )));
    }
    let (n, d) = dataset.samples().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<f64>> = (0..n_probes)
        .map(|_| {
            let source = rng.random_range(0..d);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order.iter().map(|&i| dataset.samples()[[i, source]]).collect()
        })
        .collect();
    let mut extended = baseline.clone();
    extended.weights.push(0.0);
    let outcomes = pool.map(&columns, |col| {
        let probe_set = dataset.with_column("probe", col)?;
        max_rel(&probe_set, &extended, d, delta, &ConstraintSet::new()).map(|b| b.value)
    });
    let mut values = Vec::with_capacity(n_probes);
    let mut failed = 0;
    for o in outcomes {
        match o {
            Ok(v) => values.push(v),
            Err(e) if e.is_optimization_failure() => failed += 1,
            Err(e) => return Err(e),
        }
    }
    if failed as f64 > MAX_PROBE_FAILURE_SHARE * n_probes as f64 || values.len() < 2 {
        return Err(AnalysisError::ProbeFailure { failed, total: n_probes });
    }
    Ok(ProbeResult { values, n_probes, failed, seed })
}

/// Student-t prediction interval for one further draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub mean: f64,
    pub sd: f64,
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One-sided `p` quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile(p: f64, dof: f64) -> Result<f64, AnalysisError> {
    let dist = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| AnalysisError::InvalidParameter(e.to_string()))?;
    Ok(dist.inverse_cdf(p))
}

/// `mean ± t(p, n-1) · sd · sqrt(1 + 1/n)` with the sample standard deviation.
pub fn prediction_interval(values: &[f64], p: f64) -> Result<PredictionInterval, AnalysisError> {
    let n = values.len();
    if n < 2 {
        return Err(AnalysisError::DegenerateDistribution(format!(
            "need at least 2 values, got {n}"
        )));
    }
    if !(p > 0.5 && p < 1.0) {
        return Err(AnalysisError::InvalidParameter(format!("p must lie in (0.5, 1), got {p}")));
    }
    let nf = n as f64;
    // Moments about the first value: exact when all values coincide.
    let shift = values[0];
    let offset = values.iter().map(|v| v - shift).sum::<f64>() / nf;
    let mean = shift + offset;
    let sd = (values.iter().map(|v| (v - shift - offset).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let half = t_quantile(p, nf - 1.0)? * sd * (1.0 + 1.0 / nf).sqrt();
    Ok(PredictionInterval { mean, sd, p, lower: mean - half, upper: mean + half })
}

/// Per-feature classes and the threshold they were decided against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceClasses {
    pub classes: Vec<RelevanceClass>,
    pub threshold: f64,
    pub strong_tolerance: f64,
}

impl RelevanceClasses {
    pub fn count(&self, class: RelevanceClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn relevant(&self) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_relevant())
            .map(|(j, _)| j)
            .collect()
    }
}

/// Irrelevant when the upper bound does not exceed the interval's upper
/// end; otherwise strong when the normalized lower bound exceeds
/// `strong_tolerance`, else weak.
pub fn classify_features(
    intervals: &RelevanceIntervals,
    pi: &PredictionInterval,
    strong_tolerance: f64,
) -> RelevanceClasses {
    let classes = intervals
        .lower
        .iter()
        .zip(&intervals.upper)
        .map(|(&lo, &hi)| {
            if hi <= pi.upper {
                RelevanceClass::Irrelevant
            } else if intervals.normalize(lo) > strong_tolerance {
                RelevanceClass::Strong
            } else {
                RelevanceClass::Weak
            }
        })
        .collect();
    RelevanceClasses { classes, threshold: pi.upper, strong_tolerance }
}

#[cfg(test)]
mod tests;
