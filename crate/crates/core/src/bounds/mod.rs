//! Relevance intervals: the smallest and largest absolute weight each
//! feature can take across all models that are nearly as good as the
//! baseline.

mod program;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineModel;
use crate::data::Dataset;
use crate::error::AnalysisError;
use crate::lp::LpProblem;
use crate::pool::WorkerPool;
use program::{Goal, Layout, SignedRange};

pub const DEFAULT_DELTA: f64 = 0.001;

/// Sign-fixing gives up beyond this many constrained zero-weight features.
const MAX_SIGN_BRANCHES: usize = 10;

/// Allowed range of the relevance of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ConstraintEntry {
    feature: usize,
    min: f64,
    max: f64,
}

/// User-imposed relevance ranges, keyed by feature index. Serialized as
/// `[{feature, min, max}, ...]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<ConstraintEntry>", into = "Vec<ConstraintEntry>")]
pub struct ConstraintSet {
    entries: BTreeMap<usize, FeatureRange>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces any previous range for `feature`.
    pub fn insert(&mut self, feature: usize, min: f64, max: f64) -> Result<&mut Self, AnalysisError> {
        if !(min.is_finite() && max.is_finite() && 0.0 <= min && min <= max) {
            return Err(AnalysisError::InvalidParameter(format!(
                "feature {feature}: need 0 <= min <= max, got [{min}, {max}]"
            )));
        }
        self.entries.insert(feature, FeatureRange { min, max });
        Ok(self)
    }

    pub fn get(&self, feature: usize) -> Option<FeatureRange> {
        self.entries.get(&feature).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, FeatureRange)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn validate(&self, n_features: usize) -> Result<(), AnalysisError> {
        match self.entries.keys().find(|&&l| l >= n_features) {
            Some(l) => Err(AnalysisError::InvalidParameter(format!(
                "constraint on feature {l}, but there are only {n_features} features"
            ))),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<ConstraintEntry>> for ConstraintSet {
    type Error = AnalysisError;

    fn try_from(list: Vec<ConstraintEntry>) -> Result<Self, Self::Error> {
        let mut set = Self::new();
        for e in list {
            if set.entries.contains_key(&e.feature) {
                return Err(AnalysisError::InvalidParameter(format!(
                    "feature {} constrained twice",
                    e.feature
                )));
            }
            set.insert(e.feature, e.min, e.max)?;
        }
        Ok(set)
    }
}

impl From<ConstraintSet> for Vec<ConstraintEntry> {
    fn from(set: ConstraintSet) -> Self {
        set.iter()
            .map(|(feature, r)| ConstraintEntry { feature, min: r.min, max: r.max })
            .collect()
    }
}

/// A model attaining a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub slacks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub witness: Witness,
}

/// Per-feature relevance bounds with the budget they were computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IntervalsWire", try_from = "IntervalsWire")]
pub struct RelevanceIntervals {
    pub feature_names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub delta: f64,
    /// Baseline L1 norm; display values are divided by it.
    pub mu: f64,
}

impl RelevanceIntervals {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn normalize(&self, value: f64) -> f64 {
        if self.mu > 0.0 {
            value / self.mu
        } else {
            0.0
        }
    }

    pub fn lower_normalized(&self) -> Vec<f64> {
        self.lower.iter().map(|&v| self.normalize(v)).collect()
    }

    pub fn upper_normalized(&self) -> Vec<f64> {
        self.upper.iter().map(|&v| self.normalize(v)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalWire {
    feature: String,
    lower: f64,
    upper: f64,
    #[serde(default)]
    lower_norm: f64,
    #[serde(default)]
    upper_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalsWire {
    delta: f64,
    mu: f64,
    features: Vec<IntervalWire>,
}

impl From<RelevanceIntervals> for IntervalsWire {
    fn from(r: RelevanceIntervals) -> Self {
        let features = (0..r.len())
            .map(|j| IntervalWire {
                feature: r.feature_names[j].clone(),
                lower: r.lower[j],
                upper: r.upper[j],
                lower_norm: r.normalize(r.lower[j]),
                upper_norm: r.normalize(r.upper[j]),
            })
            .collect();
        Self { delta: r.delta, mu: r.mu, features }
    }
}

impl TryFrom<IntervalsWire> for RelevanceIntervals {
    type Error = String;

    fn try_from(w: IntervalsWire) -> Result<Self, String> {
        if w.features.iter().any(|f| f.lower > f.upper + 1e-9) {
            return Err("interval with lower > upper".into());
        }
        Ok(Self {
            feature_names: w.features.iter().map(|f| f.feature.clone()).collect(),
            lower: w.features.iter().map(|f| f.lower).collect(),
            upper: w.features.iter().map(|f| f.upper).collect(),
            delta: w.delta,
            mu: w.mu,
        })
    }
}

/// Prepared feasible sets, one per sign assignment of constrained features
/// whose baseline weight is zero.
struct ModelClass {
    layout: Layout,
    branches: Vec<LpProblem>,
}

impl ModelClass {
    fn new(
        dataset: &Dataset,
        baseline: &BaselineModel,
        delta: f64,
        constraints: &ConstraintSet,
    ) -> Result<Self, AnalysisError> {
        let d = dataset.n_features();
        if !dataset.is_standardized() {
            return Err(AnalysisError::InvalidParameter(
                "relevance bounds expect a standardized dataset".into(),
            ));
        }
        if baseline.weights.len() != d || baseline.slacks.len() != dataset.n_samples() {
            return Err(AnalysisError::Dimension(format!(
                "baseline fitted on {} features and {} samples, dataset has {d} and {}",
                baseline.weights.len(),
                baseline.slacks.len(),
                dataset.n_samples()
            )));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(AnalysisError::InvalidParameter(format!("delta must be >= 0, got {delta}")));
        }
        constraints.validate(d)?;

        let zero_tol = 1e-12 * baseline.mu.max(1.0);
        let mut fixed = Vec::new();
        let mut unsigned = Vec::new();
        for (l, r) in constraints.iter() {
            let w = baseline.weights[l];
            if w.abs() <= zero_tol {
                unsigned.push((l, r));
            } else {
                fixed.push(SignedRange { feature: l, sign: w.signum(), lo: r.min, hi: r.max });
            }
        }
        if unsigned.len() > MAX_SIGN_BRANCHES {
            return Err(AnalysisError::InvalidParameter(format!(
                "{} constrained features have zero baseline weight; at most {MAX_SIGN_BRANCHES} are supported",
                unsigned.len()
            )));
        }
        let mut branches = Vec::with_capacity(1 << unsigned.len());
        for mask in 0..1usize << unsigned.len() {
            let mut ranges = fixed.clone();
            for (bit, &(l, r)) in unsigned.iter().enumerate() {
                let sign = if mask >> bit & 1 == 0 { 1.0 } else { -1.0 };
                ranges.push(SignedRange { feature: l, sign, lo: r.min, hi: r.max });
            }
            ranges.sort_by_key(|r| r.feature);
            branches.push(program::model_class(dataset, baseline, delta, &ranges)?);
        }
        Ok(Self {
            layout: Layout { d, n: dataset.n_samples() },
            branches,
        })
    }

    /// Drops sign branches without any feasible model.
    fn retain_feasible(&mut self) -> Result<(), AnalysisError> {
        let lay = self.layout;
        let mut kept = Vec::with_capacity(self.branches.len());
        for base in self.branches.drain(..) {
            if program::solve_goal(&base, lay, 0, Goal::MinAbs)?.is_some() {
                kept.push(base);
            }
        }
        self.branches = kept;
        if self.branches.is_empty() {
            return Err(infeasible());
        }
        Ok(())
    }

    /// Best value of `goal` across sign branches.
    fn solve(&self, j: usize, goal: Goal) -> Result<Option<program::Solved>, AnalysisError> {
        let mut best: Option<program::Solved> = None;
        for base in &self.branches {
            if let Some(s) = program::solve_goal(base, self.layout, j, goal)? {
                let better = match (&best, goal) {
                    (None, _) => true,
                    (Some(b), Goal::MinAbs) => s.value < b.value,
                    (Some(b), _) => s.value > b.value,
                };
                if better {
                    best = Some(s);
                }
            }
        }
        Ok(best)
    }

    fn min_rel(&self, j: usize) -> Result<Bound, AnalysisError> {
        self.solve(j, Goal::MinAbs)?.map(into_bound).ok_or_else(infeasible)
    }

    fn max_rel(&self, j: usize) -> Result<Bound, AnalysisError> {
        let pos = self.solve(j, Goal::MaxPositive)?;
        let neg = self.solve(j, Goal::MaxNegative)?;
        let best = match (pos, neg) {
            (Some(p), Some(n)) => Some(if n.value > p.value { n } else { p }),
            (p, n) => p.or(n),
        };
        best.map(into_bound).ok_or_else(infeasible)
    }
}

fn infeasible() -> AnalysisError {
    AnalysisError::Infeasible("no model of the model class satisfies the constraints".into())
}

fn into_bound(s: program::Solved) -> Bound {
    Bound {
        value: s.value,
        witness: Witness { weights: s.weights, bias: s.bias, slacks: s.slacks },
    }
}

fn check_feature(dataset: &Dataset, j: usize) -> Result<(), AnalysisError> {
    if j >= dataset.n_features() {
        return Err(AnalysisError::InvalidParameter(format!(
            "feature index {j} out of range for {} features",
            dataset.n_features()
        )));
    }
    Ok(())
}

/// Smallest `|w_j|` over the model class.
pub fn min_rel(
    dataset: &Dataset,
    baseline: &BaselineModel,
    j: usize,
    delta: f64,
    constraints: &ConstraintSet,
) -> Result<Bound, AnalysisError> {
    check_feature(dataset, j)?;
    ModelClass::new(dataset, baseline, delta, constraints)?.min_rel(j)
}

/// Largest `|w_j|` over the model class, taken as the larger of the
/// maxima of `w_j` and `-w_j`.
pub fn max_rel(
    dataset: &Dataset,
    baseline: &BaselineModel,
    j: usize,
    delta: f64,
    constraints: &ConstraintSet,
) -> Result<Bound, AnalysisError> {
    check_feature(dataset, j)?;
    ModelClass::new(dataset, baseline, delta, constraints)?.max_rel(j)
}

/// Outcome for one feature in [`compute_each`].
pub type FeatureOutcome = Result<(f64, f64), AnalysisError>;

/// Bounds for every feature, keeping per-feature failures. The outer error
/// covers invalid input and constraints that no model satisfies.
pub fn compute_each(
    dataset: &Dataset,
    baseline: &BaselineModel,
    delta: f64,
    constraints: &ConstraintSet,
    pool: &WorkerPool,
) -> Result<Vec<FeatureOutcome>, AnalysisError> {
    let mut class = ModelClass::new(dataset, baseline, delta, constraints)?;
    if !constraints.is_empty() {
        class.retain_feasible()?;
    }
    let d = dataset.n_features();
    let jobs: Vec<(usize, bool)> = (0..d).flat_map(|j| [(j, false), (j, true)]).collect();
    let values = pool.map(&jobs, |&(j, upper)| {
        if upper {
            class.max_rel(j).map(|b| b.value)
        } else {
            class.min_rel(j).map(|b| b.value)
        }
    });
    let mut it = values.into_iter();
    Ok((0..d)
        .map(|_| {
            let lo = it.next().expect("one result per job");
            let hi = it.next().expect("one result per job");
            // Both ends come from the same feasible set; a small inversion is
            // solver noise.
            lo.and_then(|lo| hi.map(|hi| (lo.min(hi), hi)))
        })
        .collect())
}

/// Bounds for every feature; fails if any feature fails.
pub fn compute_all(
    dataset: &Dataset,
    baseline: &BaselineModel,
    delta: f64,
    constraints: &ConstraintSet,
    pool: &WorkerPool,
) -> Result<RelevanceIntervals, AnalysisError> {
    let outcomes = compute_each(dataset, baseline, delta, constraints, pool)?;
    let mut lower = Vec::with_capacity(outcomes.len());
    let mut upper = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (j, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((lo, hi)) => {
                lower.push(lo);
                upper.push(hi);
            }
            Err(e) => failures.push((j, e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(AnalysisError::FeatureFailures(failures));
    }
    Ok(RelevanceIntervals {
        feature_names: dataset.feature_names().to_vec(),
        lower,
        upper,
        delta,
        mu: baseline.mu,
    })
}
