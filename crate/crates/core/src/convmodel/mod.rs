//! Relevant users, trail augmentation, the logistic-regression conversion
//! model and its AUC evaluation.

mod eval;
mod features;
mod lr;
mod metrics;
mod seed;
mod split;

use thiserror::Error;

pub use eval::{evaluate_pipeline, relevant_users_per_converted_cluster, sample_cutoffs, EvalResult, Evaluator};
pub use features::{augment, encode, relevant_users, FeatureVector, Relevance, VocabMap};
pub use lr::{gradient, objective, predict, sigmoid, train_lr, LrHyper, LrModel};
pub use metrics::auc;
pub use seed::{Provenance, SeedList, SeedListError};
pub use split::{Partition, Split, SplitFractions};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("both classes are required")]
    SingleClass,
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("scores contain NaN")]
    NanScore,
    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: u32, n_features: usize },
    #[error("training diverged to non-finite weights")]
    Diverged,
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("{0:?} partition lacks positive or negative users")]
    DegenerateSplit(Partition),
}
