use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Label;

/// Counts of the four outcomes of a binary decision, positive = security.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total()).unwrap_or(0.0)
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

pub fn confusion(truth: &[Label], predicted: &[Label]) -> Result<ConfusionMatrix, EvalError> {
    if truth.len() != predicted.len() {
        return Err(EvalError::LengthMismatch(truth.len(), predicted.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in truth.iter().zip(predicted) {
        match (t.is_security(), p.is_security()) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Like [`confusion`] but over raw 0/1 values, rejecting anything else.
pub fn confusion_u8(truth: &[u8], predicted: &[u8]) -> Result<ConfusionMatrix, EvalError> {
    let conv = |v: &[u8]| -> Result<Vec<Label>, EvalError> {
        v.iter().map(|&x| Label::from_u8(x).ok_or(EvalError::NonBinary(x))).collect()
    };
    confusion(&conv(truth)?, &conv(predicted)?)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Which metrics hit a zero denominator and were reported as 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedFlags {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
    pub gmean: bool,
    pub auc: bool,
}

impl UndefinedFlags {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1 || self.gmean || self.auc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gmean: f64,
    pub undefined: UndefinedFlags,
}

/// Precision, recall, F1 and G-mean. A zero denominator yields 0 and sets
/// the matching flag.
pub fn metrics(cm: &ConfusionMatrix) -> ThresholdMetrics {
    let mut undefined = UndefinedFlags::default();
    let precision = ratio(cm.tp, cm.tp + cm.fp).unwrap_or_else(|| {
        undefined.precision = true;
        0.0
    });
    let recall = ratio(cm.tp, cm.tp + cm.fn_).unwrap_or_else(|| {
        undefined.recall = true;
        0.0
    });
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        undefined.f1 = true;
        0.0
    };
    let den = (cm.tp + cm.fn_) as f64 * (cm.tn + cm.fp) as f64;
    let gmean = if den > 0.0 {
        libm::sqrt(cm.tp as f64 * cm.tn as f64) / libm::sqrt(den)
    } else {
        undefined.gmean = true;
        0.0
    };
    ThresholdMetrics { precision, recall, f1, gmean, undefined }
}

/// The five reported metrics for one model on one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model_name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when no scores were available or only one class was present.
    pub auc: Option<f64>,
    pub gmean: f64,
    pub undefined: UndefinedFlags,
}

impl MetricsRow {
    pub fn from_parts(model_name: impl Into<String>, m: ThresholdMetrics, auc: Option<f64>) -> Self {
        let mut undefined = m.undefined;
        undefined.auc = auc.is_none();
        MetricsRow {
            model_name: model_name.into(),
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            auc,
            gmean: m.gmean,
            undefined,
        }
    }

    /// Metrics of labels and optional scores against the truth.
    pub fn evaluate(
        model_name: impl Into<String>,
        truth: &[Label],
        predicted: &[Label],
        scores: Option<&[f64]>,
    ) -> Result<(MetricsRow, ConfusionMatrix), EvalError> {
        let cm = confusion(truth, predicted)?;
        let auc_value = match scores {
            Some(s) => match auc(truth, s) {
                Ok(a) => Some(a),
                Err(EvalError::SingleClass) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        Ok((MetricsRow::from_parts(model_name, metrics(&cm), auc_value), cm))
    }
}

/// Rank-sum AUC with average ranks for tied scores:
/// `(R+ - n+(n+ + 1)/2) / (n+ n-)`.
pub fn auc(truth: &[Label], scores: &[f64]) -> Result<f64, EvalError> {
    if truth.len() != scores.len() {
        return Err(EvalError::LengthMismatch(truth.len(), scores.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::NanScore);
    }
    let n_pos = truth.iter().filter(|l| l.is_security()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            if truth[k].is_security() {
                rank_sum_pos += avg;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}
