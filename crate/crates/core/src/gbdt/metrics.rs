use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    /// Positive class is label 1.
    Binary,
    /// Support-weighted mean of per-class one-vs-rest f1.
    Weighted,
}

/// Binary f1 when every label is 0 or 1, support-weighted otherwise.
pub fn f1_score(predicted: &[u32], truth: &[u32]) -> Result<f64> {
    let binary = predicted.iter().chain(truth).all(|&l| l <= 1);
    f1_score_with(
        predicted,
        truth,
        if binary { F1Average::Binary } else { F1Average::Weighted },
    )
}

#[derive(Default, Clone, Copy)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    // all-negative agreement (nothing predicted, nothing to find) scores 1
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

pub fn f1_score_with(predicted: &[u32], truth: &[u32], average: F1Average) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "f1 needs equal non-empty inputs, got {} and {}",
            predicted.len(),
            truth.len()
        )));
    }
    let mut per_class: BTreeMap<u32, Counts> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        if p == t {
            per_class.entry(t).or_default().tp += 1;
        } else {
            per_class.entry(p).or_default().fp += 1;
            per_class.entry(t).or_default().fn_ += 1;
        }
    }
    Ok(match average {
        F1Average::Binary => per_class.get(&1).copied().unwrap_or_default().f1(),
        F1Average::Weighted => {
            let total = truth.len() as f64;
            per_class
                .values()
                .map(|c| {
                    let support = (c.tp + c.fn_) as f64;
                    if support == 0.0 {
                        0.0
                    } else {
                        c.f1() * support / total
                    }
                })
                .sum()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_counts() {
        // TP=2, FP=1, FN=1
        let truth = [1, 1, 1, 0, 0];
        let pred = [1, 1, 0, 1, 0];
        assert!((f1_score(&pred, &truth).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_score(&truth, &truth).unwrap(), 1.0);
        assert_eq!(f1_score(&[0, 1, 0], &[1, 0, 1]).unwrap(), 0.0);
        assert!(f1_score(&[], &[]).is_err());
    }

    #[test]
    fn weighted_multiclass() {
        let truth = [0, 0, 1, 2, 2, 2];
        let pred = [0, 1, 1, 2, 2, 0];
        // class f1: 0 -> 2/4... tp=1 fp=1 fn=1 => 0.5; 1 -> tp=1 fp=1 => 2/3; 2 -> tp=2 fn=1 => 0.8
        let want = (2.0 * 0.5 + 1.0 * (2.0 / 3.0) + 3.0 * 0.8) / 6.0;
        assert!((f1_score(&pred, &truth).unwrap() - want).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn permutation_invariant_and_perfect_iff_equal(
            pairs in prop::collection::vec((0u32..4, 0u32..4), 1..60),
            rot in 0usize..60,
        ) {
            let (p, t): (Vec<u32>, Vec<u32>) = pairs.iter().copied().unzip();
            let f = f1_score(&p, &t).unwrap();
            let mut rotated = pairs.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            let (p2, t2): (Vec<u32>, Vec<u32>) = rotated.into_iter().unzip();
            prop_assert!((f - f1_score(&p2, &t2).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert_eq!(f == 1.0, p == t);
        }
    }
}
