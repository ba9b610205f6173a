use super::*;
use crate::baseline::fit_l1_svm;
use crate::bounds::{compute_all, DEFAULT_DELTA};
use crate::data::{simulate, SimulationSpec};
use ndarray::Array2;
use proptest::prelude::*;

fn intervals(lower: &[f64], upper: &[f64], mu: f64) -> RelevanceIntervals {
    RelevanceIntervals {
        feature_names: Dataset::default_names(lower.len()),
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        delta: DEFAULT_DELTA,
        mu,
    }
}

fn pi_at(upper: f64) -> PredictionInterval {
    PredictionInterval { mean: upper / 2.0, sd: 0.1, p: 0.999, lower: 0.0, upper }
}

#[test]
fn class_codes_round_trip_through_json() {
    let v = serde_json::to_string(&[RelevanceClass::Irrelevant, RelevanceClass::Weak, RelevanceClass::Strong]).unwrap();
    assert_eq!(v, "[0,1,2]");
    let back: Vec<RelevanceClass> = serde_json::from_str(&v).unwrap();
    assert_eq!(back[2], RelevanceClass::Strong);
    assert!(serde_json::from_str::<RelevanceClass>("3").is_err());
}

#[test]
fn constant_probes_collapse_interval() {
    for v in [0.25, 0.3, 0.1, 1e-7] {
        let pi = prediction_interval(&[v; 10], 0.999).unwrap();
        assert_eq!((pi.lower, pi.mean, pi.upper, pi.sd), (v, v, v, 0.0));
    }
}

#[test]
fn interval_width_formula() {
    let values = [1.0, 2.0, 3.0, 4.0];
    let pi = prediction_interval(&values, 0.9).unwrap();
    let sd = (5.0f64 / 3.0).sqrt();
    assert!((pi.sd - sd).abs() < 1e-15);
    let t = t_quantile(0.9, 3.0).unwrap();
    let width = 2.0 * t * sd * (1.25f64).sqrt();
    assert!((pi.upper - pi.lower - width).abs() < 1e-12);
    assert!(pi.lower <= pi.mean && pi.mean <= pi.upper);
}

#[test]
fn interval_rejects_degenerate_inputs() {
    assert!(matches!(prediction_interval(&[1.0], 0.99), Err(AnalysisError::DegenerateDistribution(_))));
    assert!(matches!(prediction_interval(&[1.0, 2.0], 0.5), Err(AnalysisError::InvalidParameter(_))));
    assert!(matches!(prediction_interval(&[1.0, 2.0], 1.0), Err(AnalysisError::InvalidParameter(_))));
}

#[test]
fn one_sided_quantile_reference_values() {
    // Reference values from an independent statistics library.
    assert!((t_quantile(0.975, 10.0).unwrap() - 2.228138851986274).abs() < 1e-9);
    assert!((t_quantile(0.999, 49.0).unwrap() - 3.265079172928758).abs() < 1e-9);
}

#[test]
fn classification_rules() {
    let r = intervals(&[0.5, 0.0, 0.0, 0.00001], &[0.9, 0.6, 0.05, 0.7], 1.0);
    let c = classify_features(&r, &pi_at(0.1), DEFAULT_STRONG_TOLERANCE);
    use RelevanceClass::*;
    assert_eq!(c.classes, vec![Strong, Weak, Irrelevant, Weak]);
    assert_eq!(c.threshold, 0.1);
    assert_eq!(c.relevant(), vec![0, 1, 3]);
}

#[test]
fn below_the_noise_band_is_irrelevant() {
    let r = intervals(&[0.0], &[0.001], 1.0);
    let pi = PredictionInterval { mean: 0.05, sd: 0.01, p: 0.999, lower: 0.02, upper: 0.08 };
    assert_eq!(classify_features(&r, &pi, 1e-4).classes, vec![RelevanceClass::Irrelevant]);
}

#[test]
fn strong_tolerance_is_relative_to_mu() {
    let r = intervals(&[0.05], &[1.0], 100.0);
    let c = classify_features(&r, &pi_at(0.1), 1e-4);
    assert_eq!(c.classes, vec![RelevanceClass::Strong]);
    let c = classify_features(&r, &pi_at(0.1), 1e-3);
    assert_eq!(c.classes, vec![RelevanceClass::Weak]);
}

#[test]
fn constant_dataset_probes_are_identical() {
    let samples = Array2::from_elem((12, 3), 4.0);
    let labels = (0..12).map(|i| if i < 5 { 1.0 } else { -1.0 }).collect();
    let data = Dataset::new(samples, labels, Dataset::default_names(3)).unwrap().standardize();
    let m = fit_l1_svm(&data, 1.0).unwrap();
    let probes = generate_probes(&data, &m, 6, DEFAULT_DELTA, 1, &WorkerPool::sequential()).unwrap();
    assert!(probes.values.iter().all(|&v| v == probes.values[0]));
    let pi = prediction_interval(&probes.values, 0.999).unwrap();
    assert_eq!(pi.sd, 0.0);
}

#[test]
fn probes_are_deterministic_and_worker_independent() {
    let (raw, _) = simulate(&SimulationSpec::new(2, 2, 2, 60, 4)).unwrap();
    let data = raw.standardize();
    let m = fit_l1_svm(&data, 1.0).unwrap();
    let a = generate_probes(&data, &m, 8, DEFAULT_DELTA, 9, &WorkerPool::sequential()).unwrap();
    let b = generate_probes(&data, &m, 8, DEFAULT_DELTA, 9, &WorkerPool::new(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values.len(), 8);
    assert!(a.values.iter().all(|&v| v >= 0.0));
    let c = generate_probes(&data, &m, 8, DEFAULT_DELTA, 10, &WorkerPool::sequential()).unwrap();
    assert_ne!(a.values, c.values);
}

#[test]
fn probe_noise_sits_below_strong_features() {
    let (raw, truth) = simulate(&SimulationSpec::new(4, 4, 22, 500, 21)).unwrap();
    let data = raw.standardize();
    let m = fit_l1_svm(&data, 1.0).unwrap();
    let pool = WorkerPool::sequential();
    let r = compute_all(&data, &m, DEFAULT_DELTA, &Default::default(), &pool).unwrap();
    let probes = generate_probes(&data, &m, DEFAULT_PROBES, DEFAULT_DELTA, 21, &pool).unwrap();
    let mean = probes.values.iter().sum::<f64>() / probes.values.len() as f64;
    let weakest_strong = (0..30)
        .filter(|&j| truth.classes[j] == RelevanceClass::Strong)
        .map(|j| r.upper[j])
        .fold(f64::INFINITY, f64::min);
    assert!(mean < weakest_strong, "{mean} vs {weakest_strong}");
}

#[test]
fn too_few_probes_rejected() {
    let (raw, _) = simulate(&SimulationSpec::new(1, 0, 1, 20, 1)).unwrap();
    let data = raw.standardize();
    let m = fit_l1_svm(&data, 1.0).unwrap();
    assert!(matches!(
        generate_probes(&data, &m, 1, DEFAULT_DELTA, 0, &WorkerPool::sequential()),
        Err(AnalysisError::InvalidParameter(_))
    ));
}

proptest! {
    #[test]
    fn probe_order_does_not_change_interval(values in proptest::collection::vec(0.0f64..1.0, 2..60), seed: u64) {
        use rand::seq::SliceRandom;
        let mut shuffled = values.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = prediction_interval(&values, 0.999).unwrap();
        let b = prediction_interval(&shuffled, 0.999).unwrap();
        prop_assert!((a.upper - b.upper).abs() <= 1e-12 * (1.0 + a.upper.abs()));
        prop_assert!((a.lower - b.lower).abs() <= 1e-12 * (1.0 + a.lower.abs()));
    }

    #[test]
    fn partition_and_threshold_monotonicity(
        pairs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30),
        t1 in 0.0f64..1.0,
        t2 in 0.0f64..1.0,
    ) {
        let lower: Vec<f64> = pairs.iter().map(|p| p.0.min(p.1)).collect();
        let upper: Vec<f64> = pairs.iter().map(|p| p.0.max(p.1)).collect();
        let r = intervals(&lower, &upper, 1.0);
        let (lo_t, hi_t) = (t1.min(t2), t1.max(t2));
        let narrow = classify_features(&r, &pi_at(lo_t), 1e-4);
        let wide = classify_features(&r, &pi_at(hi_t), 1e-4);
        let total = narrow.count(RelevanceClass::Strong) + narrow.count(RelevanceClass::Weak)
            + narrow.count(RelevanceClass::Irrelevant);
        prop_assert_eq!(total, pairs.len());
        for j in 0..pairs.len() {
            if narrow.classes[j] == RelevanceClass::Irrelevant {
                prop_assert_eq!(wide.classes[j], RelevanceClass::Irrelevant);
            }
        }
    }
}
