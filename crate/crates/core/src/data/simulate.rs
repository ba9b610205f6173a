use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::classify::RelevanceClass;

fn default_jitter() -> f64 {
    0.0
}

fn default_min_prototype() -> f64 {
    0.2
}

/// Parameters of a synthetic dataset with known feature relevance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n_strong: usize,
    pub n_weak: usize,
    pub n_irrelevant: usize,
    pub n_samples: usize,
    pub random_seed: u64,
    /// Sizes of the weakly relevant groups. `None` uses
    /// [`default_weak_groups`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_groups: Option<Vec<usize>>,
    /// Standard deviation of the per-column noise inside weak groups. Zero
    /// makes every member of a group an exact copy of its source feature.
    #[serde(default = "default_jitter")]
    pub weak_jitter: f64,
    #[serde(default)]
    pub label_flip_rate: f64,
    /// Smallest magnitude of a hyperplane coefficient, in `[0, 1)`.
    #[serde(default = "default_min_prototype")]
    pub min_prototype_weight: f64,
}

impl SimulationSpec {
    pub fn new(n_strong: usize, n_weak: usize, n_irrelevant: usize, n_samples: usize, seed: u64) -> Self {
        Self {
            n_strong,
            n_weak,
            n_irrelevant,
            n_samples,
            random_seed: seed,
            weak_groups: None,
            weak_jitter: default_jitter(),
            label_flip_rate: 0.0,
            min_prototype_weight: default_min_prototype(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_strong + self.n_weak + self.n_irrelevant
    }

    /// Group sizes after applying the default partition.
    pub fn groups(&self) -> Result<Vec<usize>, DataError> {
        let groups = match &self.weak_groups {
            Some(g) => g.clone(),
            None => default_weak_groups(self.n_weak)?,
        };
        if groups.iter().sum::<usize>() != self.n_weak {
            return Err(DataError::Spec(format!(
                "weak group sizes {groups:?} do not sum to {}",
                self.n_weak
            )));
        }
        if groups.iter().any(|&g| g < 2) {
            return Err(DataError::Spec("every weak group needs at least 2 members".into()));
        }
        Ok(groups)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.n_strong + self.n_weak == 0 {
            return Err(DataError::Spec(
                "at least one strong or weak feature is needed to generate labels".into(),
            ));
        }
        if self.n_samples < 2 {
            return Err(DataError::Spec(format!("n_samples must be at least 2, got {}", self.n_samples)));
        }
        if !(self.weak_jitter.is_finite() && self.weak_jitter >= 0.0) {
            return Err(DataError::Spec(format!("weak_jitter must be >= 0, got {}", self.weak_jitter)));
        }
        if !(0.0..0.5).contains(&self.label_flip_rate) {
            return Err(DataError::Spec(format!(
                "label_flip_rate must lie in [0, 0.5), got {}",
                self.label_flip_rate
            )));
        }
        if !(0.0..1.0).contains(&self.min_prototype_weight) {
            return Err(DataError::Spec(format!(
                "min_prototype_weight must lie in [0, 1), got {}",
                self.min_prototype_weight
            )));
        }
        self.groups().map(|_| ())
    }
}

/// Groups of four; a remainder of 2 or 3 forms its own group, a remainder of
/// 1 joins the last group.
pub fn default_weak_groups(n_weak: usize) -> Result<Vec<usize>, DataError> {
    if n_weak == 1 {
        return Err(DataError::Spec("a single weak feature cannot form a group".into()));
    }
    let mut groups = vec![4; n_weak / 4];
    match n_weak % 4 {
        0 => {}
        1 => *groups.last_mut().expect("n_weak >= 5") += 1,
        r => groups.push(r),
    }
    Ok(groups)
}

/// True relevance class per feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub classes: Vec<RelevanceClass>,
}

impl GroundTruth {
    pub fn count(&self, class: RelevanceClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Indices of weak and strong features.
    pub fn relevant(&self) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_relevant())
            .map(|(i, _)| i)
            .collect()
    }
}

const MAX_LABEL_ATTEMPTS: usize = 100;

/// Column layout: strong features, then weak groups in order, then
/// irrelevant features.
pub fn simulate(spec: &SimulationSpec) -> Result<(Dataset, GroundTruth), DataError> {
    spec.validate()?;
    let groups = spec.groups()?;
    let n = spec.n_samples;
    let k = spec.n_strong + groups.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.random_seed);

    let prototype: Vec<f64> = (0..k)
        .map(|_| loop {
            let w: f64 = rng.random_range(-1.0..=1.0);
            if w.abs() >= spec.min_prototype_weight {
                break w;
            }
        })
        .collect();

    let (informative, labels) = {
        let mut attempt = 0;
        loop {
            let x = Array2::from_shape_fn((n, k), |_| StandardNormal.sample(&mut rng));
            let mut y: Vec<f64> = x
                .rows()
                .into_iter()
                .map(|row| {
                    let s: f64 = row.iter().zip(&prototype).map(|(a, b)| a * b).sum();
                    if s >= 0.0 { 1.0 } else { -1.0 }
                })
                .collect();
            if spec.label_flip_rate > 0.0 {
                for yi in &mut y {
                    if rng.random_bool(spec.label_flip_rate) {
                        *yi = -*yi;
                    }
                }
            }
            if y.contains(&1.0) && y.contains(&-1.0) {
                break (x, y);
            }
            attempt += 1;
            if attempt == MAX_LABEL_ATTEMPTS {
                return Err(DataError::Spec(format!(
                    "could not draw both label classes with {n} samples"
                )));
            }
        }
    };

    let d = spec.n_features();
    let mut samples = Array2::<f64>::zeros((n, d));
    let mut classes = Vec::with_capacity(d);
    for j in 0..spec.n_strong {
        samples.column_mut(j).assign(&informative.column(j));
        classes.push(RelevanceClass::Strong);
    }

    let jitter = Normal::new(0.0, spec.weak_jitter).map_err(|e| DataError::Spec(e.to_string()))?;
    let mut col = spec.n_strong;
    for (g, &size) in groups.iter().enumerate() {
        let source = informative.column(spec.n_strong + g);
        let raw: Vec<f64> = (0..size).map(|_| rng.random_range(0.5..1.5)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        for i in 0..n {
            let f = source[i];
            let mut residual = 0.0;
            for m in 0..size - 1 {
                let e = jitter.sample(&mut rng);
                samples[[i, col + m]] = f + e;
                residual += weights[m] * e;
            }
            // Closes the mixture so that the weighted sum reproduces f.
            samples[[i, col + size - 1]] = f - residual / weights[size - 1];
        }
        classes.extend(std::iter::repeat_n(RelevanceClass::Weak, size));
        col += size;
    }

    for j in col..d {
        for i in 0..n {
            samples[[i, j]] = StandardNormal.sample(&mut rng);
        }
        classes.push(RelevanceClass::Irrelevant);
    }

    let dataset = Dataset::new(samples, labels, Dataset::default_names(d))?;
    Ok((dataset, GroundTruth { classes }))
}
