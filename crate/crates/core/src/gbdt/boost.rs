//! Newton boosting with one-vs-rest logistic outputs (or squared error for
//! regression targets).

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use super::tree::{fit_tree_presorted, Presorted, TreeNode, TreeParams};
use super::{derive_seed, HyperParams};
use crate::error::{Error, Result};

const PROBA_CLIP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// One tree list per class; a single list for two classes.
    Logistic,
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub objective: Objective,
    /// Outer index is the output (class for one-vs-rest), inner is the round.
    pub trees: Vec<Vec<TreeNode>>,
    pub base_scores: Vec<f64>,
    pub hyperparams: HyperParams,
    pub class_labels: Vec<u32>,
    pub n_features: usize,
}

pub enum Target<'a> {
    Classes { labels: &'a [u32], n_classes: usize },
    Continuous(&'a [f64]),
}

/// A training matrix with its per-feature sort orders, reusable across fits.
pub struct Prepared<'a> {
    pub x: &'a FeatureMatrix,
    presorted: Presorted,
}

impl<'a> Prepared<'a> {
    pub fn new(x: &'a FeatureMatrix) -> Result<Self> {
        x.check_finite()?;
        Ok(Self {
            x,
            presorted: Presorted::new(x),
        })
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

fn log_odds(p: f64) -> f64 {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    (p / (1.0 - p)).ln()
}

/// Classification with labels `0..K`, `K` taken from the largest label.
pub fn boost_fit(x: &FeatureMatrix, labels: &[u32], params: &HyperParams, seed: u64) -> Result<BoostedModel> {
    let n_classes = labels.iter().max().map_or(0, |m| *m as usize + 1);
    let prepared = Prepared::new(x)?;
    fit_prepared(&prepared, &Target::Classes { labels, n_classes }, params, seed, None)
}

pub fn fit_prepared(
    data: &Prepared<'_>,
    target: &Target<'_>,
    params: &HyperParams,
    seed: u64,
    mut loss_trace: Option<&mut Vec<f64>>,
) -> Result<BoostedModel> {
    let x = data.x;
    let n = x.n_rows();
    if n == 0 || x.n_cols() == 0 {
        return Err(Error::InvalidArgument("empty training matrix".into()));
    }
    params.validate()?;

    // targets[k][r] is the response for output k
    let (objective, targets, class_labels): (Objective, Vec<Vec<f64>>, Vec<u32>) = match target {
        Target::Classes { labels, n_classes } => {
            if labels.len() != n {
                return Err(Error::InvalidArgument("label count differs from row count".into()));
            }
            let mut distinct: Vec<u32> = labels.to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 2 {
                return Err(Error::DegenerateLabel(distinct.len()));
            }
            if labels.iter().any(|&l| l as usize >= *n_classes) {
                return Err(Error::InvalidArgument("label outside 0..n_classes".into()));
            }
            let outputs: Vec<u32> = if *n_classes == 2 {
                vec![1]
            } else {
                (0..*n_classes as u32).collect()
            };
            let targets = outputs
                .iter()
                .map(|&k| labels.iter().map(|&l| if l == k { 1.0 } else { 0.0 }).collect())
                .collect();
            (Objective::Logistic, targets, (0..*n_classes as u32).collect())
        }
        Target::Continuous(y) => {
            if y.len() != n {
                return Err(Error::InvalidArgument("target count differs from row count".into()));
            }
            if let Some(row) = y.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    row,
                    column: x.n_cols(),
                });
            }
            (Objective::SquaredError, vec![y.to_vec()], Vec::new())
        }
    };

    let base_scores: Vec<f64> = targets
        .iter()
        .map(|t| {
            let mean = t.iter().sum::<f64>() / n as f64;
            match objective {
                Objective::Logistic => log_odds(mean),
                Objective::SquaredError => mean,
            }
        })
        .collect();
    let mut scores: Vec<Vec<f64>> = base_scores.iter().map(|&b| vec![b; n]).collect();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_child_weight: params.min_child_weight,
        l2_lambda: params.l2_lambda,
    };
    let n_rows_sampled = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    let n_cols_sampled = ((params.colsample * x.n_cols() as f64).round() as usize).clamp(1, x.n_cols());
    let all_rows: Vec<usize> = (0..n).collect();
    let all_cols: Vec<usize> = (0..x.n_cols()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x6b6f_6f73));

    let mut trees: Vec<Vec<TreeNode>> = vec![Vec::with_capacity(params.rounds); targets.len()];
    let mut grads = vec![0.0; n];
    let mut hess = vec![0.0; n];
    if let Some(trace) = loss_trace.as_deref_mut() {
        trace.push(training_loss(objective, &targets, &scores));
    }
    for _round in 0..params.rounds {
        let rows = if n_rows_sampled == n {
            all_rows.clone()
        } else {
            let mut r = sample(&mut rng, n, n_rows_sampled).into_vec();
            r.sort_unstable();
            r
        };
        let cols = if n_cols_sampled == x.n_cols() {
            all_cols.clone()
        } else {
            let mut c = sample(&mut rng, x.n_cols(), n_cols_sampled).into_vec();
            c.sort_unstable();
            c
        };
        for (k, t) in targets.iter().enumerate() {
            let s = &scores[k];
            match objective {
                Objective::Logistic => {
                    for r in 0..n {
                        let p = sigmoid(s[r]);
                        grads[r] = p - t[r];
                        hess[r] = (p * (1.0 - p)).max(1e-16);
                    }
                }
                Objective::SquaredError => {
                    for r in 0..n {
                        grads[r] = s[r] - t[r];
                        hess[r] = 1.0;
                    }
                }
            }
            let mut tree = fit_tree_presorted(x, &data.presorted, &grads, &hess, &tree_params, &rows, &cols)?;
            tree.scale(params.learning_rate);
            let s = &mut scores[k];
            for (r, v) in s.iter_mut().enumerate() {
                *v += tree.predict_at(x, r);
            }
            trees[k].push(tree);
        }
        if let Some(trace) = loss_trace.as_deref_mut() {
            trace.push(training_loss(objective, &targets, &scores));
        }
    }
    Ok(BoostedModel {
        objective,
        trees,
        base_scores,
        hyperparams: *params,
        class_labels,
        n_features: x.n_cols(),
    })
}

/// Mean per-row objective: summed one-vs-rest log loss, or squared error.
pub fn training_loss(objective: Objective, targets: &[Vec<f64>], scores: &[Vec<f64>]) -> f64 {
    let n = targets[0].len() as f64;
    let mut total = 0.0;
    for (t, s) in targets.iter().zip(scores) {
        for (&y, &z) in t.iter().zip(s) {
            total += match objective {
                // log(1 + e^z) - y z, evaluated stably
                Objective::Logistic => z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z,
                Objective::SquaredError => 0.5 * (z - y).powi(2),
            };
        }
    }
    total / n
}

impl BoostedModel {
    pub fn rounds(&self) -> usize {
        self.trees.first().map_or(0, Vec::len)
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn raw_scores(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_features {
            return Err(Error::WidthMismatch {
                expected: self.n_features,
                actual: row.len(),
            });
        }
        Ok(self
            .trees
            .iter()
            .zip(&self.base_scores)
            .map(|(ts, &b)| b + ts.iter().map(|t| t.predict(row)).sum::<f64>())
            .collect())
    }

    fn proba_from_scores(&self, scores: &[f64]) -> Vec<f64> {
        let clip = |s: f64| sigmoid(s).clamp(PROBA_CLIP, 1.0 - PROBA_CLIP);
        if scores.len() == 1 {
            let p = clip(scores[0]);
            return vec![1.0 - p, p];
        }
        let ps: Vec<f64> = scores.iter().map(|&s| clip(s)).collect();
        let total: f64 = ps.iter().sum();
        ps.into_iter().map(|p| p / total).collect()
    }

    pub fn predict_proba(&self, row: &[f64]) -> Result<Vec<f64>> {
        if self.objective != Objective::Logistic {
            return Err(Error::InvalidArgument(
                "probabilities need a classification model".into(),
            ));
        }
        Ok(self.proba_from_scores(&self.raw_scores(row)?))
    }

    /// Raw regression output.
    pub fn predict_value(&self, row: &[f64]) -> Result<f64> {
        Ok(self.raw_scores(row)?[0])
    }

    fn matrix_scores(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        if x.n_cols() != self.n_features {
            return Err(Error::WidthMismatch {
                expected: self.n_features,
                actual: x.n_cols(),
            });
        }
        Ok(self
            .trees
            .iter()
            .zip(&self.base_scores)
            .map(|(ts, &b)| {
                let mut s = vec![b; x.n_rows()];
                for t in ts {
                    for (r, v) in s.iter_mut().enumerate() {
                        *v += t.predict_at(x, r);
                    }
                }
                s
            })
            .collect())
    }

    /// Most probable class per row; ties go to the lower label.
    pub fn predict_classes(&self, x: &FeatureMatrix) -> Result<Vec<u32>> {
        let scores = self.matrix_scores(x)?;
        Ok((0..x.n_rows())
            .map(|r| {
                let row: Vec<f64> = scores.iter().map(|s| s[r]).collect();
                let p = self.proba_from_scores(&row);
                let mut best = 0;
                for (k, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = k;
                    }
                }
                self.class_labels[best]
            })
            .collect())
    }

    pub fn predict_values(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.matrix_scores(x)?.swap_remove(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(depth: usize, lr: f64, rounds: usize) -> HyperParams {
        HyperParams {
            max_depth: depth,
            learning_rate: lr,
            rounds,
            min_child_weight: 0.0,
            subsample: 1.0,
            colsample: 1.0,
            l2_lambda: 1.0,
        }
    }

    #[test]
    fn separable_stump() {
        let x = FeatureMatrix::new(6, vec![vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]]).unwrap();
        let y = [0, 0, 0, 1, 1, 1];
        let m = boost_fit(&x, &y, &hp(1, 1.0, 1), 0).unwrap();
        assert_eq!(m.predict_classes(&x).unwrap(), y);
    }

    #[test]
    fn zero_rounds_gives_priors() {
        let x = FeatureMatrix::new(4, vec![vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
        let m = boost_fit(&x, &[0, 1, 1, 1], &hp(2, 0.1, 0), 0).unwrap();
        let p = m.predict_proba(&[0.0]).unwrap();
        assert!((p[1] - 0.75).abs() < 1e-12);
        let m3 = boost_fit(&x, &[0, 1, 2, 2], &hp(2, 0.1, 0), 0).unwrap();
        let p = m3.predict_proba(&[1.0]).unwrap();
        for (got, want) in p.iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_scores_are_even() {
        let m = BoostedModel {
            objective: Objective::Logistic,
            trees: vec![vec![]],
            base_scores: vec![0.0],
            hyperparams: hp(2, 0.1, 0),
            class_labels: vec![0, 1],
            n_features: 1,
        };
        assert_eq!(m.predict_proba(&[3.0]).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(m.predict_proba(&[1.0, 2.0]), Err(Error::WidthMismatch { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = FeatureMatrix::new(2, vec![vec![0.0, f64::NAN]]).unwrap();
        assert!(matches!(
            boost_fit(&x, &[0, 1], &hp(2, 0.1, 5), 0),
            Err(Error::NonFinite { .. })
        ));
        let x = FeatureMatrix::new(2, vec![vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            boost_fit(&x, &[1, 1], &hp(2, 0.1, 5), 0),
            Err(Error::DegenerateLabel(1))
        ));
    }

    #[test]
    fn regression_fits_linear_target() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = xs.iter().map(|v| 3.0 * v + 1.0).collect();
        let x = FeatureMatrix::new(50, vec![xs]).unwrap();
        let data = Prepared::new(&x).unwrap();
        let m = fit_prepared(&data, &Target::Continuous(&y), &hp(4, 0.3, 200), 0, None).unwrap();
        let pred = m.predict_values(&x).unwrap();
        let mse = pred.iter().zip(&y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / 50.0;
        assert!(mse < 1.0, "{mse}");
    }

    #[test]
    fn deterministic_given_seed() {
        let x = FeatureMatrix::new(
            40,
            vec![
                (0..40).map(|i| ((i * 7) % 13) as f64).collect(),
                (0..40).map(|i| (i % 5) as f64).collect(),
            ],
        )
        .unwrap();
        let y: Vec<u32> = (0..40).map(|i| (i % 3) as u32).collect();
        let mut p = hp(3, 0.2, 20);
        p.subsample = 0.6;
        p.colsample = 0.5;
        let a = boost_fit(&x, &y, &p, 9).unwrap();
        let b = boost_fit(&x, &y, &p, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.trees.iter().all(|t| t.len() == 20));
    }
}
