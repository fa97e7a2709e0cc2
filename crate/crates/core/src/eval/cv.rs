//! K-fold cross-validation, unseen-set evaluation and scoring of external
//! prediction files.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, EvalError, FoldPlan, MetricsRow, UndefinedFlags};
use crate::classifiers::{fit, ModelSpec, TrainConfig, TrainedModel};
use crate::corpus::{Dataset, Label};
use crate::features::EmbeddingTable;
use crate::preprocess::TokenList;

pub use crate::classifiers::Predictions;

/// Anything that can be trained on one split and scored on another.
pub trait FoldModel {
    fn name(&self) -> String;

    /// Fits on the training split only and predicts the test split.
    fn fit_predict(
        &self,
        train_tokens: &[TokenList],
        train_labels: &[Label],
        test_tokens: &[TokenList],
        seed: u64,
    ) -> Result<Predictions, crate::Error>;
}

/// A model spec with its training regime; the fold seed replaces both seeds.
pub struct SpecModel<'a> {
    pub spec: ModelSpec,
    pub config: TrainConfig,
    pub embeddings: Option<&'a EmbeddingTable>,
}

impl FoldModel for SpecModel<'_> {
    fn name(&self) -> String {
        self.spec.name()
    }

    fn fit_predict(
        &self,
        train_tokens: &[TokenList],
        train_labels: &[Label],
        test_tokens: &[TokenList],
        seed: u64,
    ) -> Result<Predictions, crate::Error> {
        let spec = ModelSpec { seed, ..self.spec.clone() };
        let config = TrainConfig { seed, ..self.config.clone() };
        let model = fit(&spec, train_tokens, train_labels, &config, self.embeddings)?;
        Ok(model.predict(test_tokens))
    }
}

/// How fold results become one row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    /// Average each metric over the folds.
    #[default]
    MeanOfFolds,
    /// Compute the metrics once over all held-out predictions.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldLog {
    pub fold: usize,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub confusion: ConfusionMatrix,
    pub row: MetricsRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub row: MetricsRow,
    pub mode: CvMode,
    pub folds: Vec<FoldLog>,
    /// Held-out scores in dataset order.
    pub scores: Vec<f64>,
}

fn gather<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

pub fn cross_validate(
    model: &dyn FoldModel,
    tokens: &[TokenList],
    labels: &[Label],
    plan: &FoldPlan,
    mode: CvMode,
) -> Result<CvOutcome, crate::Error> {
    if tokens.len() != labels.len() {
        return Err(EvalError::LengthMismatch(tokens.len(), labels.len()).into());
    }
    if plan.len() != tokens.len() {
        return Err(EvalError::PlanMismatch { plan: plan.len(), data: tokens.len() }.into());
    }
    let name = model.name();
    let mut tested = vec![0u32; tokens.len()];
    let mut pooled_pred = vec![Label::NonSecurity; tokens.len()];
    let mut pooled_scores = vec![0.0; tokens.len()];
    let mut folds = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let test = plan.test_indices(fold);
        let train = plan.train_indices(fold);
        let mut in_test = vec![false; tokens.len()];
        test.iter().for_each(|&i| in_test[i] = true);
        assert!(train.iter().all(|&i| !in_test[i]), "fold {fold} trains on test data");
        let seed = plan.fold_seed(fold);
        let pred = model.fit_predict(
            &gather(tokens, &train),
            &gather(labels, &train),
            &gather(tokens, &test),
            seed,
        )?;
        if pred.len() != test.len() {
            return Err(EvalError::LengthMismatch(pred.len(), test.len()).into());
        }
        let truth = gather(labels, &test);
        let (row, confusion) = MetricsRow::evaluate(&name, &truth, &pred.labels, Some(&pred.scores))?;
        for (k, &i) in test.iter().enumerate() {
            tested[i] += 1;
            pooled_pred[i] = pred.labels[k];
            pooled_scores[i] = pred.scores[k];
        }
        folds.push(FoldLog {
            fold,
            seed,
            train_size: train.len(),
            test_size: test.len(),
            confusion,
            row,
        });
    }
    assert!(tested.iter().all(|&c| c == 1), "folds do not partition the dataset");
    let row = match mode {
        CvMode::MeanOfFolds => mean_row(&name, &folds),
        CvMode::Pooled => MetricsRow::evaluate(&name, labels, &pooled_pred, Some(&pooled_scores))?.0,
    };
    Ok(CvOutcome { row, mode, folds, scores: pooled_scores })
}

/// Per-metric mean over folds. AUC averages the folds where it is defined;
/// a flag is set when any fold left a metric undefined.
pub fn mean_row(name: &str, folds: &[FoldLog]) -> MetricsRow {
    let n = folds.len() as f64;
    let mean = |f: fn(&MetricsRow) -> f64| folds.iter().map(|l| f(&l.row)).sum::<f64>() / n;
    let aucs: Vec<f64> = folds.iter().filter_map(|l| l.row.auc).collect();
    let auc = (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64);
    let mut undefined = UndefinedFlags::default();
    for l in folds {
        let u = &l.row.undefined;
        undefined.precision |= u.precision;
        undefined.recall |= u.recall;
        undefined.f1 |= u.f1;
        undefined.gmean |= u.gmean;
        undefined.auc |= u.auc;
    }
    MetricsRow {
        model_name: name.into(),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1: mean(|r| r.f1),
        auc,
        gmean: mean(|r| r.gmean),
        undefined,
    }
}

/// Scores a model trained elsewhere on a disjoint labeled set.
pub fn evaluate_unseen(
    model: &TrainedModel,
    tokens: &[TokenList],
    labels: &[Label],
) -> Result<(MetricsRow, ConfusionMatrix), EvalError> {
    if tokens.len() != labels.len() {
        return Err(EvalError::LengthMismatch(tokens.len(), labels.len()));
    }
    let pred = model.predict(tokens);
    MetricsRow::evaluate(model.name(), labels, &pred.labels, Some(&pred.scores))
}

/// Scores an id-keyed prediction set against a labeled dataset. AUC is left
/// out when any score is missing.
pub fn evaluate_predictions(
    name: &str,
    ds: &Dataset,
    predictions: &BTreeMap<String, (Label, Option<f64>)>,
) -> Result<(MetricsRow, ConfusionMatrix), EvalError> {
    let mut truth = Vec::with_capacity(ds.len());
    let mut pred = Vec::with_capacity(ds.len());
    let mut scores = Vec::with_capacity(ds.len());
    for r in ds.records() {
        let (label, score) =
            predictions.get(r.id()).ok_or_else(|| EvalError::MissingPrediction(r.id().into()))?;
        truth.push(r.label);
        pred.push(*label);
        scores.push(*score);
    }
    if predictions.len() != ds.len() {
        let known: alloc::collections::BTreeSet<&str> = ds.records().iter().map(|r| r.id()).collect();
        if let Some(id) = predictions.keys().find(|k| !known.contains(k.as_str())) {
            return Err(EvalError::UnknownPrediction(id.clone()));
        }
    }
    let scores: Option<Vec<f64>> = scores.into_iter().collect();
    MetricsRow::evaluate(name, &truth, &pred, scores.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::para;
    use crate::eval::metrics;
    use alloc::string::ToString;

    struct Constant(Label);

    impl FoldModel for Constant {
        fn name(&self) -> String {
            "const".into()
        }
        fn fit_predict(
            &self,
            _: &[TokenList],
            _: &[Label],
            test: &[TokenList],
            _: u64,
        ) -> Result<Predictions, crate::Error> {
            let s = if self.0.is_security() { 1.0 } else { 0.0 };
            Ok(Predictions::from_scores(vec![s; test.len()]))
        }
    }

    fn balanced(n: usize) -> (Vec<TokenList>, Vec<Label>) {
        let tokens = (0..n).map(|i| TokenList::new(vec![alloc::format!("t{i}")])).collect();
        let labels = (0..n).map(|i| Label::from_bool(i % 2 == 0)).collect();
        (tokens, labels)
    }

    #[test]
    fn constant_model_oracle() {
        let (t, l) = balanced(40);
        let plan = FoldPlan::stratified(&l, 10, 1).unwrap();
        let out = cross_validate(&Constant(Label::Security), &t, &l, &plan, CvMode::Pooled).unwrap();
        assert_eq!(out.row.recall, 1.0);
        assert_eq!(out.row.precision, 0.5);
        let out = cross_validate(&Constant(Label::Security), &t, &l, &plan, CvMode::MeanOfFolds).unwrap();
        assert_eq!(out.row.recall, 1.0);
        assert!((out.row.precision - 0.5).abs() < 1e-12);
        let out = cross_validate(&Constant(Label::NonSecurity), &t, &l, &plan, CvMode::MeanOfFolds).unwrap();
        assert_eq!(out.row.recall, 0.0);
        assert!(out.row.undefined.precision);
    }

    #[test]
    fn mean_matches_hand_average_of_fold_logs() {
        let (t, l) = balanced(50);
        let plan = FoldPlan::random(50, 5, 3).unwrap();
        let spec = ModelSpec::new(
            crate::classifiers::Family::DecisionTree,
            crate::classifiers::FeatureScheme::Bow,
            0,
        );
        let m = SpecModel { spec, config: TrainConfig::default(), embeddings: None };
        let out = cross_validate(&m, &t, &l, &plan, CvMode::MeanOfFolds).unwrap();
        assert_eq!(out.folds.len(), 5);
        let mut f1 = 0.0;
        for log in &out.folds {
            let rm = metrics(&log.confusion);
            assert_eq!(rm.f1, log.row.f1);
            f1 += rm.f1;
        }
        assert!((out.row.f1 - f1 / 5.0).abs() < 1e-12);
        assert_eq!(out.folds.iter().map(|f| f.test_size).sum::<usize>(), 50);
    }

    #[test]
    fn plan_must_cover_data() {
        let (t, l) = balanced(12);
        let plan = FoldPlan::random(10, 10, 0).unwrap();
        let e = cross_validate(&Constant(Label::Security), &t, &l, &plan, CvMode::Pooled);
        assert!(matches!(e, Err(crate::Error::Eval(EvalError::PlanMismatch { .. }))));
    }

    fn dataset() -> Dataset {
        let recs = vec![
            para("a", "x", Label::Security),
            para("b", "y", Label::NonSecurity),
            para("c", "z", Label::Security),
        ];
        Dataset::new("d", "test", recs).unwrap()
    }

    #[test]
    fn predictions_file_scoring() {
        let ds = dataset();
        let mut p: BTreeMap<String, (Label, Option<f64>)> = ds
            .records()
            .iter()
            .map(|r| (r.id().into(), (r.label, Some(r.label.as_u8() as f64))))
            .collect();
        let (row, _) = evaluate_predictions("gold", &ds, &p).unwrap();
        assert_eq!((row.precision, row.recall, row.f1, row.auc), (1.0, 1.0, 1.0, Some(1.0)));

        p.get_mut(ds.records()[0].id()).unwrap().1 = None;
        let (row, _) = evaluate_predictions("gold", &ds, &p).unwrap();
        assert!(row.auc.is_none() && row.undefined.auc);

        p.insert("ghost".into(), (Label::Security, None));
        assert_eq!(
            evaluate_predictions("x", &ds, &p).unwrap_err(),
            EvalError::UnknownPrediction("ghost".into())
        );
        let first = ds.records()[0].id().to_string();
        p.remove(&first);
        assert_eq!(evaluate_predictions("x", &ds, &p).unwrap_err(), EvalError::MissingPrediction(first));
    }
}
