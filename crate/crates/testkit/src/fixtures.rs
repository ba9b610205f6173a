//! Small datasets with a known relevance structure.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use relint_core::data::{simulate, Dataset, SimulationSpec};

/// Four columns: a sole predictor, an exactly duplicated informative pair
/// and an independent standard-normal column. Labels are
/// `sign(2 x0 + x1)` without noise.
pub fn sole_pair_noise(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Array2::<f64>::zeros((n, 4));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        samples[[i, 0]] = a;
        samples[[i, 1]] = b;
        samples[[i, 2]] = b;
        samples[[i, 3]] = rng.sample(StandardNormal);
        labels.push(if 2.0 * a + b >= 0.0 { 1.0 } else { -1.0 });
    }
    Dataset::new(samples, labels, Dataset::default_names(4)).expect("both classes drawn")
}

/// Eight columns: four strong features, three identical copies of one
/// informative feature and one noise column.
pub fn strong_triplet_noise(seed: u64, n: usize) -> Dataset {
    let mut spec = SimulationSpec::new(4, 3, 1, n, seed);
    spec.weak_groups = Some(vec![3]);
    spec.weak_jitter = 0.0;
    simulate(&spec).expect("valid spec").0
}

/// Three standardized features and 30 samples with labels from a random
/// hyperplane plus label noise, sized for the lattice oracle.
pub fn three_feature_instance(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    loop {
        let samples = Array2::from_shape_fn((30, 3), |_| rng.sample::<f64, _>(StandardNormal));
        let labels: Vec<f64> = samples
            .rows()
            .into_iter()
            .map(|r| {
                let s: f64 = r.iter().zip(&w).map(|(a, b)| a * b).sum();
                let y = if s >= 0.0 { 1.0 } else { -1.0 };
                if rng.random_bool(0.1) { -y } else { y }
            })
            .collect();
        let positives = labels.iter().filter(|&&y| y > 0.0).count();
        if (5..=25).contains(&positives) {
            return Dataset::new(samples, labels, Dataset::default_names(3))
                .expect("valid instance")
                .standardize();
        }
    }
}
