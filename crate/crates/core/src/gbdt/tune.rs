//! Random hyperparameter search scored by stratified k-fold f1, stopped
//! after a run of trials without improvement.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::boost::{fit_prepared, Prepared, Target};
use super::cv::kfold_indices;
use super::matrix::FeatureMatrix;
use super::metrics::{f1_score_with, F1Average};
use super::{derive_seed, HyperParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub max_depth: (usize, usize),
    /// Sampled log-uniformly.
    pub learning_rate: (f64, f64),
    pub rounds: (usize, usize),
    pub min_child_weight: (f64, f64),
    pub subsample: (f64, f64),
    pub colsample: (f64, f64),
    pub l2_lambda: f64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            max_depth: (2, 8),
            learning_rate: (0.01, 0.3),
            rounds: (50, 500),
            min_child_weight: (1.0, 10.0),
            subsample: (0.5, 1.0),
            colsample: (0.5, 1.0),
            l2_lambda: 1.0,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let (lr0, lr1) = self.learning_rate;
        let ok = self.max_depth.0 <= self.max_depth.1
            && lr0 > 0.0
            && lr0 <= lr1
            && self.rounds.0 <= self.rounds.1
            && self.min_child_weight.0 >= 0.0
            && self.min_child_weight.0 <= self.min_child_weight.1
            && self.subsample.0 > 0.0
            && self.subsample.0 <= self.subsample.1
            && self.subsample.1 <= 1.0
            && self.colsample.0 > 0.0
            && self.colsample.0 <= self.colsample.1
            && self.colsample.1 <= 1.0
            && self.l2_lambda >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid search space {self:?}")))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> HyperParams {
        let (lr0, lr1) = self.learning_rate;
        HyperParams {
            max_depth: rng.random_range(self.max_depth.0..=self.max_depth.1),
            learning_rate: rng.random_range(lr0.ln()..=lr1.ln()).exp().clamp(lr0, lr1),
            rounds: rng.random_range(self.rounds.0..=self.rounds.1),
            min_child_weight: rng.random_range(self.min_child_weight.0..=self.min_child_weight.1),
            subsample: rng.random_range(self.subsample.0..=self.subsample.1),
            colsample: rng.random_range(self.colsample.0..=self.colsample.1),
            l2_lambda: self.l2_lambda,
        }
    }

    pub fn contains(&self, p: &HyperParams) -> bool {
        let within = |v: f64, (lo, hi): (f64, f64)| lo <= v && v <= hi;
        (self.max_depth.0..=self.max_depth.1).contains(&p.max_depth)
            && within(p.learning_rate, self.learning_rate)
            && (self.rounds.0..=self.rounds.1).contains(&p.rounds)
            && within(p.min_child_weight, self.min_child_weight)
            && within(p.subsample, self.subsample)
            && within(p.colsample, self.colsample)
            && p.l2_lambda == self.l2_lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub k: usize,
    pub patience: usize,
    pub max_trials: usize,
    pub space: SearchSpace,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            k: 5,
            patience: 50,
            max_trials: 200,
            space: SearchSpace::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: HyperParams,
    pub cv_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_params: HyperParams,
    pub best_cv_f1: f64,
    pub trials: Vec<Trial>,
    pub wall_time_seconds: f64,
}

/// Draws trial `t` from `space` with seed `derive_seed(seed, t)` and scores
/// it with `objective(params, trial_seed)`. Only a strictly higher score
/// counts as an improvement.
pub fn random_search<F>(
    space: &SearchSpace,
    patience: usize,
    max_trials: usize,
    seed: u64,
    mut objective: F,
) -> Result<TuneResult>
where
    F: FnMut(&HyperParams, u64) -> Result<f64>,
{
    if patience < 1 || max_trials < 1 {
        return Err(Error::InvalidArgument(format!(
            "patience and max_trials must be at least 1, got {patience} and {max_trials}"
        )));
    }
    space.validate()?;
    let start = Instant::now();
    let mut trials = Vec::new();
    let mut best: Option<Trial> = None;
    let mut stale = 0;
    for t in 0..max_trials as u64 {
        let trial_seed = derive_seed(seed, t);
        let params = space.sample(&mut ChaCha8Rng::seed_from_u64(trial_seed));
        let cv_f1 = objective(&params, trial_seed)?;
        let trial = Trial { params, cv_f1 };
        trials.push(trial);
        match best {
            Some(b) if cv_f1 <= b.cv_f1 => {
                stale += 1;
                if stale >= patience {
                    break;
                }
            }
            _ => {
                best = Some(trial);
                stale = 0;
            }
        }
    }
    let best = best.expect("at least one trial runs");
    Ok(TuneResult {
        best_params: best.params,
        best_cv_f1: best.cv_f1,
        trials,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Averaging mode used for a problem with `n_classes` labels.
pub fn f1_average_for(n_classes: usize) -> F1Average {
    if n_classes <= 2 {
        F1Average::Binary
    } else {
        F1Average::Weighted
    }
}

/// Tunes a classifier on `x` with labels `0..n_classes`. Fold matrices and
/// their sort orders are built once and shared by every trial; that setup
/// counts toward the reported wall time.
pub fn tune(x: &FeatureMatrix, labels: &[u32], n_classes: usize, config: &TuneConfig, seed: u64) -> Result<TuneResult> {
    let start = Instant::now();
    if labels.len() != x.n_rows() {
        return Err(Error::InvalidArgument("label count differs from row count".into()));
    }
    let folds = kfold_indices(x.n_rows(), config.k, Some(labels), derive_seed(seed, 0x666f_6c64))?;
    let average = f1_average_for(n_classes);

    struct Fold {
        train: FeatureMatrix,
        train_labels: Vec<u32>,
        valid: FeatureMatrix,
        valid_labels: Vec<u32>,
    }
    let mut in_fold = vec![usize::MAX; x.n_rows()];
    for (f, rows) in folds.iter().enumerate() {
        for &r in rows {
            in_fold[r] = f;
        }
    }
    let built: Vec<Fold> = folds
        .iter()
        .enumerate()
        .map(|(f, valid_rows)| {
            let train_rows: Vec<usize> = (0..x.n_rows()).filter(|&r| in_fold[r] != f).collect();
            Fold {
                train: x.select_rows(&train_rows),
                train_labels: train_rows.iter().map(|&r| labels[r]).collect(),
                valid: x.select_rows(valid_rows),
                valid_labels: valid_rows.iter().map(|&r| labels[r]).collect(),
            }
        })
        .collect();
    let prepared: Vec<Prepared<'_>> = built.iter().map(|f| Prepared::new(&f.train)).collect::<Result<_>>()?;

    let mut result = random_search(
        &config.space,
        config.patience,
        config.max_trials,
        seed,
        |params, trial_seed| {
            let mut total = 0.0;
            for (i, (fold, data)) in built.iter().zip(&prepared).enumerate() {
                let target = Target::Classes {
                    labels: &fold.train_labels,
                    n_classes,
                };
                let model = fit_prepared(data, &target, params, derive_seed(trial_seed, i as u64), None)?;
                let predicted = model.predict_classes(&fold.valid)?;
                total += f1_score_with(&predicted, &fold.valid_labels, average)?;
            }
            Ok(total / built.len() as f64)
        },
    )?;
    result.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_objective_stops_after_patience() {
        let r = random_search(&SearchSpace::default(), 50, 1000, 1, |_, _| Ok(0.5)).unwrap();
        assert_eq!(r.trials.len(), 51);
        let r = random_search(&SearchSpace::default(), 50, 20, 1, |_, _| Ok(0.5)).unwrap();
        assert_eq!(r.trials.len(), 20);
    }

    #[test]
    fn single_trial_is_first_draw() {
        let space = SearchSpace::default();
        let r = random_search(&space, 5, 1, 42, |_, _| Ok(0.1)).unwrap();
        let want = space.sample(&mut ChaCha8Rng::seed_from_u64(derive_seed(42, 0)));
        assert_eq!(r.best_params, want);
        assert_eq!(r.trials.len(), 1);
    }

    #[test]
    fn rejects_zero_patience() {
        assert!(random_search(&SearchSpace::default(), 0, 10, 0, |_, _| Ok(0.0)).is_err());
        assert!(random_search(&SearchSpace::default(), 1, 0, 0, |_, _| Ok(0.0)).is_err());
    }

    proptest! {
        #[test]
        fn draws_stay_in_space(seed in any::<u64>()) {
            let space = SearchSpace::default();
            let p = space.sample(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(space.contains(&p));
            prop_assert!(p.validate().is_ok());
        }

        #[test]
        fn best_is_max_and_running_best_nondecreasing(
            scores in prop::collection::vec(0.0f64..1.0, 1..40),
            patience in 1usize..6,
        ) {
            let mut it = scores.iter().copied();
            let r = random_search(&SearchSpace::default(), patience, scores.len(), 3, |_, _| Ok(it.next().unwrap())).unwrap();
            let max = r.trials.iter().map(|t| t.cv_f1).fold(f64::MIN, f64::max);
            prop_assert_eq!(r.best_cv_f1, max);
            prop_assert!(r.trials.len() <= scores.len());
            let mut running = f64::MIN;
            let mut prev = f64::MIN;
            for t in &r.trials {
                running = running.max(t.cv_f1);
                prop_assert!(running >= prev);
                prev = running;
            }
        }
    }

    #[test]
    fn tune_separable_and_deterministic() {
        let n = 60;
        let a: Vec<f64> = (0..n).map(|i| i as f64 + if i < 30 { 0.0 } else { 20.0 }).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 17) % 11) as f64).collect();
        let x = FeatureMatrix::new(n, vec![a, b]).unwrap();
        let y: Vec<u32> = (0..n).map(|i| u32::from(i >= 30)).collect();
        let config = TuneConfig {
            k: 3,
            patience: 3,
            max_trials: 6,
            space: SearchSpace {
                rounds: (5, 20),
                ..SearchSpace::default()
            },
        };
        let r = tune(&x, &y, 2, &config, 7).unwrap();
        assert!(r.best_cv_f1 > 0.95, "{}", r.best_cv_f1);
        let again = tune(&x, &y, 2, &config, 7).unwrap();
        assert_eq!(r.trials, again.trials);
        assert!(r.wall_time_seconds > 0.0);
    }
}
