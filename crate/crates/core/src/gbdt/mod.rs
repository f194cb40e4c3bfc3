//! Gradient-boosted decision trees with cross-validated random-search tuning.

mod boost;
mod cv;
mod matrix;
mod metrics;
mod tree;
mod tune;

pub use boost::{boost_fit, fit_prepared, training_loss, BoostedModel, Objective, Prepared, Target};
pub use cv::kfold_indices;
pub use matrix::FeatureMatrix;
pub use metrics::{f1_score, f1_score_with, F1Average};
pub use tree::{
    best_split, fit_tree, fit_tree_presorted, leaf_weight, split_gain, Presorted, Split, TreeNode, TreeParams,
};
pub use tune::{f1_average_for, random_search, tune, SearchSpace, Trial, TuneConfig, TuneResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub rounds: usize,
    pub min_child_weight: f64,
    pub subsample: f64,
    pub colsample: f64,
    pub l2_lambda: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            max_depth: 4,
            learning_rate: 0.1,
            rounds: 100,
            min_child_weight: 1.0,
            subsample: 1.0,
            colsample: 1.0,
            l2_lambda: 1.0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.min_child_weight >= 0.0
            && self.subsample > 0.0
            && self.subsample <= 1.0
            && self.colsample > 0.0
            && self.colsample <= 1.0
            && self.l2_lambda >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid hyperparameters {self:?}")))
        }
    }
}

/// SplitMix64 over `base ^ stream`, used to derive independent child seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        ^ stream
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(0x632b_e59b_d9b4_e019);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
