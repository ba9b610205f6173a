//! Feature-selection scoring against known ground truth and the simulated
//! benchmark over several dataset configurations.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalysisParams};
use crate::classify::RelevanceClass;
use crate::data::{simulate, GroundTruth, SimulationSpec};
use crate::error::AnalysisError;
use crate::pool::WorkerPool;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Compares selected feature indices with the weak and strong features of
/// `truth`. Empty denominators score 0.
pub fn score_selection(predicted: &[usize], truth: &GroundTruth) -> SelectionScore {
    let predicted: BTreeSet<usize> = predicted.iter().copied().collect();
    let relevant: BTreeSet<usize> = truth.relevant().into_iter().collect();
    let tp = predicted.intersection(&relevant).count();
    let fp = predicted.len() - tp;
    let fn_ = relevant.len() - tp;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    SelectionScore { tp, fp, fn_, precision, recall, f1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub name: String,
    pub spec: SimulationSpec,
}

/// The five 30-feature, 500-sample configurations: sparse and dense
/// relevant sets, with and without weakly relevant groups, and one without
/// strongly relevant features.
pub fn default_configs() -> Vec<BenchmarkConfig> {
    [(4, 4, 22), (12, 8, 10), (4, 0, 26), (18, 0, 12), (0, 20, 10)]
        .into_iter()
        .enumerate()
        .map(|(i, (s, w, r))| BenchmarkConfig {
            name: format!("Sim{}", i + 1),
            spec: SimulationSpec::new(s, w, r, 500, 1000 * (i as u64 + 1)),
        })
        .collect()
}

/// One simulated dataset run through the full analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub config: String,
    pub replicate: usize,
    pub seed: u64,
    pub score: Option<SelectionScore>,
    pub training_accuracy: Option<f64>,
    pub predicted_strong: usize,
    pub predicted_weak: usize,
    pub predicted_irrelevant: usize,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub name: String,
    pub spec: SimulationSpec,
    pub replicates: usize,
    pub failed: usize,
    pub precision_mean: f64,
    pub precision_sd: f64,
    pub recall_mean: f64,
    pub recall_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
    pub training_accuracy_mean: f64,
    pub wall_ms_mean: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ConfigSummary {
    /// Aggregates over the successful rows of one configuration.
    pub fn from_rows(config: &BenchmarkConfig, rows: &[ReplicateRow]) -> Self {
        let scores: Vec<SelectionScore> = rows.iter().filter_map(|r| r.score).collect();
        let pick = |f: fn(&SelectionScore) -> f64| mean_sd(&scores.iter().map(f).collect::<Vec<_>>());
        let (precision_mean, precision_sd) = pick(|s| s.precision);
        let (recall_mean, recall_sd) = pick(|s| s.recall);
        let (f1_mean, f1_sd) = pick(|s| s.f1);
        let acc: Vec<f64> = rows.iter().filter_map(|r| r.training_accuracy).collect();
        let wall: Vec<f64> = rows.iter().map(|r| r.wall_ms).collect();
        Self {
            name: config.name.clone(),
            spec: config.spec.clone(),
            replicates: rows.len(),
            failed: rows.iter().filter(|r| r.error.is_some()).count(),
            precision_mean,
            precision_sd,
            recall_mean,
            recall_sd,
            f1_mean,
            f1_sd,
            training_accuracy_mean: mean_sd(&acc).0,
            wall_ms_mean: mean_sd(&wall).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub configs: Vec<ConfigSummary>,
    pub rows: Vec<ReplicateRow>,
}

impl BenchmarkReport {
    /// Copy with wall-clock fields zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.wall_ms = 0.0;
        }
        for c in &mut out.configs {
            c.wall_ms_mean = 0.0;
        }
        out
    }

    /// One line per configuration.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "config,n_strong,n_weak,n_irrelevant,n_samples,replicates,failed,\
             precision_mean,precision_sd,recall_mean,recall_sd,f1_mean,f1_sd,\
             training_accuracy_mean,wall_ms_mean\n",
        );
        for c in &self.configs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.name,
                c.spec.n_strong,
                c.spec.n_weak,
                c.spec.n_irrelevant,
                c.spec.n_samples,
                c.replicates,
                c.failed,
                c.precision_mean,
                c.precision_sd,
                c.recall_mean,
                c.recall_sd,
                c.f1_mean,
                c.f1_sd,
                c.training_accuracy_mean,
                c.wall_ms_mean
            ));
        }
        out
    }
}

fn replicate_seed(base: u64, replicate: usize) -> u64 {
    base.wrapping_add(replicate as u64)
}

fn run_replicate(
    config: &BenchmarkConfig,
    replicate: usize,
    params: &AnalysisParams,
    pool: &WorkerPool,
) -> ReplicateRow {
    let seed = replicate_seed(config.spec.random_seed, replicate);
    let start = Instant::now();
    let outcome = (|| -> Result<_, AnalysisError> {
        let spec = SimulationSpec { random_seed: seed, ..config.spec.clone() };
        let (data, truth) = simulate(&spec)?;
        let params = AnalysisParams { seed, ..params.clone() };
        let analysis = analyze(&data, &params, pool)?;
        let accuracy = analysis.baseline.training_accuracy(&data.standardize())?;
        Ok((analysis.classes, truth, accuracy))
    })();
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((classes, truth, accuracy)) => ReplicateRow {
            config: config.name.clone(),
            replicate,
            seed,
            score: Some(score_selection(&classes.relevant(), &truth)),
            training_accuracy: Some(accuracy),
            predicted_strong: classes.count(RelevanceClass::Strong),
            predicted_weak: classes.count(RelevanceClass::Weak),
            predicted_irrelevant: classes.count(RelevanceClass::Irrelevant),
            wall_ms,
            error: None,
        },
        Err(e) => ReplicateRow {
            config: config.name.clone(),
            replicate,
            seed,
            score: None,
            training_accuracy: None,
            predicted_strong: 0,
            predicted_weak: 0,
            predicted_irrelevant: 0,
            wall_ms,
            error: Some(e.to_string()),
        },
    }
}

/// Runs `replicates` datasets per configuration. Replicate `r` uses seed
/// `spec.random_seed + r` for both the data and the analysis. Failures are
/// recorded in the rows and do not stop the run.
pub fn run_benchmark(
    configs: &[BenchmarkConfig],
    replicates: usize,
    params: &AnalysisParams,
    pool: &WorkerPool,
) -> Result<BenchmarkReport, AnalysisError> {
    params.validate()?;
    for c in configs {
        c.spec.validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..replicates).map(move |r| (c, r)))
        .collect();
    let rows = pool.map(&jobs, |&(c, r)| run_replicate(&configs[c], r, params, pool));
    let summaries = configs
        .iter()
        .map(|c| {
            let mine: Vec<ReplicateRow> = rows.iter().filter(|r| r.config == c.name).cloned().collect();
            ConfigSummary::from_rows(c, &mine)
        })
        .collect();
    Ok(BenchmarkReport { configs: summaries, rows })
}
