//! Brute-force relevance bounds for tiny problems.
//!
//! Enumerates weight vectors on a regular lattice inside the L1 ball of
//! radius `(1 + delta) mu`. A lattice point is feasible when some bias
//! keeps the total hinge loss within `rho`; the hinge sum is convex and
//! piecewise linear in the bias, so its minimum sits at one of the kinks.
//!
//! Extremes of a thin feasible region can sit more than one lattice step
//! away from every feasible lattice point, so each extreme is then polished
//! by exhaustive search on a ten times finer local lattice.

use relint_core::data::Dataset;

/// Oracle result for one feature.
#[derive(Debug, Clone, Copy)]
pub struct LatticeBound {
    /// Extremes over the coarse lattice.
    pub coarse: (f64, f64),
    /// Extremes after local refinement.
    pub refined: (f64, f64),
}

struct Problem<'a> {
    data: &'a Dataset,
    rho: f64,
    radius: f64,
}

impl Problem<'_> {
    fn feasible(&self, w: [f64; 3]) -> bool {
        if w.iter().map(|v| v.abs()).sum::<f64>() > self.radius + 1e-12 {
            return false;
        }
        let x = self.data.samples();
        let scores: Vec<f64> = (0..x.nrows())
            .map(|i| w[0] * x[[i, 0]] + w[1] * x[[i, 1]] + w[2] * x[[i, 2]])
            .collect();
        min_hinge(&scores, self.data.labels()) <= self.rho + 1e-12
    }

    /// Best feasible point in a cube around `start` on a lattice of `step`,
    /// repeated until the objective stops improving.
    fn polish(&self, start: [f64; 3], step: f64, reach: i64, score: impl Fn([f64; 3]) -> f64) -> f64 {
        let mut best = start;
        let mut best_score = score(start);
        loop {
            let centre = best;
            for a in -reach..=reach {
                for b in -reach..=reach {
                    for c in -reach..=reach {
                        let w = [
                            centre[0] + a as f64 * step,
                            centre[1] + b as f64 * step,
                            centre[2] + c as f64 * step,
                        ];
                        let s = score(w);
                        if s > best_score && self.feasible(w) {
                            best = w;
                            best_score = s;
                        }
                    }
                }
            }
            if best == centre {
                return best_score;
            }
        }
    }
}

/// Per-feature bounds on `|w_j|`, or `None` if no lattice point is feasible.
pub fn lattice_bounds(
    data: &Dataset,
    mu: f64,
    rho: f64,
    delta: f64,
    step: f64,
) -> Option<Vec<LatticeBound>> {
    assert_eq!(data.n_features(), 3, "the lattice oracle is written for three features");
    let problem = Problem { data, rho, radius: (1.0 + delta) * mu };
    let steps = (problem.radius / step).floor() as i64;
    let mut lo = [(f64::INFINITY, [0.0; 3]); 3];
    let mut hi = [(f64::NEG_INFINITY, [0.0; 3]); 3];
    let mut record = |w: [f64; 3]| {
        for j in 0..3 {
            if w[j].abs() < lo[j].0 {
                lo[j] = (w[j].abs(), w);
            }
            if w[j].abs() > hi[j].0 {
                hi[j] = (w[j].abs(), w);
            }
        }
    };
    for a in -steps..=steps {
        for b in -steps..=steps {
            let rest = steps - a.abs() - b.abs();
            if rest < 0 {
                continue;
            }
            let point = |c: i64| [a as f64 * step, b as f64 * step, c as f64 * step];
            // The feasible set is convex, so along this line it is an
            // interval: locate both ends and take the interior for free.
            let Some(first) = (-rest..=rest).find(|&c| problem.feasible(point(c))) else {
                continue;
            };
            let last = (first..=rest).rev().find(|&c| problem.feasible(point(c))).unwrap_or(first);
            record(point(first));
            record(point(last));
            record(point(0.clamp(first, last)));
        }
    }
    if hi[0].0 < 0.0 {
        return None;
    }
    let fine = step / 10.0;
    Some(
        (0..3)
            .map(|j| LatticeBound {
                coarse: (lo[j].0, hi[j].0),
                refined: (
                    -problem.polish(lo[j].1, fine, 10, |w| -w[j].abs()),
                    problem.polish(hi[j].1, fine, 10, |w| w[j].abs()),
                ),
            })
            .collect(),
    )
}

/// Smallest total hinge loss `sum max(0, 1 - y (s - bias))` over the bias.
///
/// The sum is convex in the bias with kinks at `s_i - y_i`; the minimum is
/// at the kink where the slope turns nonnegative.
pub fn min_hinge(scores: &[f64], labels: &[f64]) -> f64 {
    let mut kinks: Vec<f64> = scores.iter().zip(labels).map(|(s, y)| s - y).collect();
    kinks.sort_by(f64::total_cmp);
    // Slope left of every kink: each negative sample contributes -1.
    let mut slope = -(labels.iter().filter(|&&y| y < 0.0).count() as f64);
    let mut at = kinks[0];
    for &k in &kinks {
        at = k;
        // Every kink raises the slope by one: a positive sample's term
        // switches on, or a negative sample's term switches off.
        slope += 1.0;
        if slope >= 0.0 {
            break;
        }
    }
    hinge_at(scores, labels, at)
}

fn hinge_at(scores: &[f64], labels: &[f64], bias: f64) -> f64 {
    scores.iter().zip(labels).map(|(s, y)| (1.0 - y * (s - bias)).max(0.0)).sum()
}

/// Reference for [`min_hinge`] that evaluates every kink.
pub fn min_hinge_naive(scores: &[f64], labels: &[f64]) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(s, y)| hinge_at(scores, labels, s - y))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sorted_hinge_minimum_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let n = rng.random_range(2..40);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut labels: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            labels[0] = 1.0;
            labels[1] = -1.0;
            let a = min_hinge(&scores, &labels);
            let b = min_hinge_naive(&scores, &labels);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
