//! Confusion matrices, the five reported metrics, agreement, sample-size
//! planning, fold plans, cross-validation and report rendering.

mod agreement;
mod cv;
mod folds;
mod metrics;
mod report;
mod sampling;

use alloc::string::String;

use thiserror::Error;

pub use agreement::cohen_kappa;
pub use cv::{
    cross_validate, evaluate_predictions, evaluate_unseen, mean_row, CvMode, CvOutcome, FoldLog,
    FoldModel, Predictions, SpecModel,
};
pub use folds::{FoldPlan, DEFAULT_FOLDS};
pub use metrics::{
    auc, confusion, confusion_u8, metrics, ConfusionMatrix, MetricsRow, ThresholdMetrics,
    UndefinedFlags,
};
pub use report::{best_flags, percent, render_report, ReportFormat, Rounding, CSV_HEADER};
pub use sampling::{normal_quantile, sample_size, z_score};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-binary label value {0}")]
    NonBinary(u8),
    #[error("AUC needs at least one positive and one negative")]
    SingleClass,
    #[error("score is NaN")]
    NanScore,
    #[error("kappa undefined: expected agreement is 1")]
    KappaUndefined,
    #[error("empty input")]
    Empty,
    #[error("margin of error must be in (0, 1), got {0}")]
    InvalidMargin(f64),
    #[error("confidence must be in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("dataset has {n} records, fewer than {k} folds")]
    DatasetSmallerThanFolds { n: usize, k: usize },
    #[error("fold plan covers {plan} records but {data} were given")]
    PlanMismatch { plan: usize, data: usize },
    #[error("no prediction for paragraph {0}")]
    MissingPrediction(String),
    #[error("prediction for unknown paragraph {0}")]
    UnknownPrediction(String),
}
