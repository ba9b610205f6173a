//! Binary classification scores over `±1` labels.

use serde::{Deserialize, Serialize};

/// Counts indexed by (true class, predicted class).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    /// Positive class is `+1`.
    pub fn from_labels(truth: &[f64], predicted: &[f64]) -> Self {
        let mut m = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t > 0.0, p > 0.0) {
                (true, true) => m.true_pos += 1,
                (false, true) => m.false_pos += 1,
                (false, false) => m.true_neg += 1,
                (true, false) => m.false_neg += 1,
            }
        }
        m
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    /// Per-class F1 averaged with weights equal to each class's share of the
    /// true labels.
    pub fn weighted_f1(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let pos_support = (self.true_pos + self.false_neg) as f64;
        let neg_support = (self.true_neg + self.false_pos) as f64;
        let f1_pos = f1(self.true_pos, self.false_pos, self.false_neg);
        let f1_neg = f1(self.true_neg, self.false_neg, self.false_pos);
        (pos_support * f1_pos + neg_support * f1_neg) / total as f64
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn accuracy(truth: &[f64], predicted: &[f64]) -> f64 {
    ConfusionMatrix::from_labels(truth, predicted).accuracy()
}

pub fn weighted_f1(truth: &[f64], predicted: &[f64]) -> f64 {
    ConfusionMatrix::from_labels(truth, predicted).weighted_f1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_weighted_f1() {
        // 4 positives, 2 negatives; one positive missed, one negative missed.
        let truth = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0];
        let pred = [1.0, 1.0, 1.0, -1.0, 1.0, -1.0];
        let m = ConfusionMatrix::from_labels(&truth, &pred);
        assert_eq!((m.true_pos, m.false_pos, m.true_neg, m.false_neg), (3, 1, 1, 1));
        let expected = (4.0 * 0.75 + 2.0 * 0.5) / 6.0;
        assert!((m.weighted_f1() - expected).abs() < 1e-15);
        assert!((m.accuracy() - 4.0 / 6.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn weighted_f1_bounded_and_one_iff_diagonal(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
            let truth: Vec<f64> = pairs.iter().map(|p| if p.0 { 1.0 } else { -1.0 }).collect();
            let pred: Vec<f64> = pairs.iter().map(|p| if p.1 { 1.0 } else { -1.0 }).collect();
            let m = ConfusionMatrix::from_labels(&truth, &pred);
            let f = m.weighted_f1();
            prop_assert!((0.0..=1.0).contains(&f));
            let diagonal = m.false_pos == 0 && m.false_neg == 0;
            prop_assert_eq!(f == 1.0, diagonal);
        }
    }
}
