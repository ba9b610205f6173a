//! End-to-end analyses on constructions with a known answer.

use relint_core::bounds::ConstraintSet;
use relint_core::classify::RelevanceClass;
use relint_core::data::{simulate, SimulationSpec};
use relint_core::pool::WorkerPool;
use relint_core::{analyze, Analysis, AnalysisParams};
use relint_testkit::fixtures;

fn params(seed: u64) -> AnalysisParams {
    AnalysisParams { seed, ..Default::default() }
}

#[test]
fn sole_pair_and_noise_are_recovered() {
    let pool = WorkerPool::sequential();
    for seed in 0..20 {
        let data = fixtures::sole_pair_noise(seed, 200);
        let a = analyze(&data, &params(seed), &pool).unwrap();
        let r = &a.intervals;
        use RelevanceClass::*;
        assert_eq!(a.classes.classes, vec![Strong, Weak, Weak, Irrelevant], "seed {seed}: {r:?}");
        assert!((r.upper[1] - r.upper[2]).abs() < 1e-6, "seed {seed}");
        assert!(r.lower[1] < 1e-6 && r.lower[2] < 1e-6, "seed {seed}");
    }
}

fn triplet_analysis() -> (relint_core::data::Dataset, Analysis) {
    let data = fixtures::strong_triplet_noise(3, 500);
    let a = analyze(&data, &params(3), &WorkerPool::sequential()).unwrap();
    (data, a)
}

#[test]
fn pinning_a_copy_at_its_maximum_silences_the_others() {
    let (data, a) = triplet_analysis();
    let free = &a.intervals;
    let mut k = ConstraintSet::new();
    k.insert(4, free.upper[4], free.upper[4]).unwrap();
    let pinned = a.constrained(&data, &k, &WorkerPool::sequential()).unwrap();
    let upper = pinned.intervals.upper_normalized();
    assert!(upper[5] < 1e-3 && upper[6] < 1e-3, "{upper:?}");
    // The original analysis is not touched.
    assert_eq!(a.intervals, *free);
}

#[test]
fn pinning_a_copy_at_its_minimum_changes_nothing_for_the_others() {
    let (data, a) = triplet_analysis();
    let free = &a.intervals;
    let mut k = ConstraintSet::new();
    k.insert(4, free.lower[4], free.lower[4]).unwrap();
    let pinned = a.constrained(&data, &k, &WorkerPool::sequential()).unwrap();
    for j in [5, 6] {
        assert!((pinned.intervals.lower[j] - free.lower[j]).abs() < 1e-6, "feature {j}");
        assert!((pinned.intervals.upper[j] - free.upper[j]).abs() < 1e-6, "feature {j}");
    }
}

#[test]
fn triplet_classes() {
    let (_, a) = triplet_analysis();
    use RelevanceClass::*;
    assert_eq!(a.classes.classes, vec![Strong, Strong, Strong, Strong, Weak, Weak, Weak, Irrelevant]);
}

#[test]
fn interval_invariants_on_simulated_data() {
    let (data, _) = simulate(&SimulationSpec::new(3, 4, 8, 200, 8)).unwrap();
    let pool = WorkerPool::sequential();
    let mut previous: Option<Analysis> = None;
    for delta in [0.0, 0.001, 0.05] {
        let a = analyze(&data, &AnalysisParams { delta, n_probes: 4, ..params(8) }, &pool).unwrap();
        let r = &a.intervals;
        for j in 0..r.len() {
            let w = a.baseline.weights[j].abs();
            assert!(0.0 <= r.lower[j] && r.lower[j] <= r.upper[j]);
            assert!(r.lower[j] - 1e-6 <= w && w <= r.upper[j] + 1e-6, "feature {j}");
        }
        if let Some(p) = &previous {
            assert_eq!(p.baseline, a.baseline);
            for j in 0..r.len() {
                assert!(r.lower[j] <= p.intervals.lower[j] + 1e-9);
                assert!(r.upper[j] >= p.intervals.upper[j] - 1e-9);
            }
        }
        previous = Some(a);
    }
}

#[test]
fn report_is_identical_for_any_worker_count() {
    let (data, _) = simulate(&SimulationSpec::new(2, 4, 6, 150, 5)).unwrap();
    let p = AnalysisParams { n_probes: 12, ..params(5) };
    let one = analyze(&data, &p, &WorkerPool::sequential()).unwrap().report().to_json();
    let many = analyze(&data, &p, &WorkerPool::new(4)).unwrap().report().to_json();
    assert_eq!(one, many);
}
