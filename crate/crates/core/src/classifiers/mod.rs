//! The twelve classical configurations (four learners over three vector
//! schemes) and the three deep sequence models, behind one fit/predict API.

mod ensemble;
pub mod nn;
mod svm;
mod tree;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ensemble::{BoostedTrees, BoostingParams, ForestParams, RandomForest};
pub use nn::{DeepArchitecture, Network, TrainConfig, TrainingLog};
pub use svm::{LinearSvm, SvmParams};
pub use tree::{Node, Tree};

use crate::corpus::Label;
use crate::features::{
    bow_vectorize, embedding_vectorize, encode_sequence, EmbeddingTable, FeatureError,
    FeatureMatrix, IdfWeights, SparseRow, TokenSequence, VectorScheme, Vocabulary, DEFAULT_MAXLEN,
};
use crate::preprocess::TokenList;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomForest,
    DecisionTree,
    GradientBoostedTrees,
    SvmLinear,
    DeepM1,
    DeepM2,
    DeepM3,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::RandomForest,
        Family::DecisionTree,
        Family::GradientBoostedTrees,
        Family::SvmLinear,
        Family::DeepM1,
        Family::DeepM2,
        Family::DeepM3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomForest => "random_forest",
            Family::DecisionTree => "decision_tree",
            Family::GradientBoostedTrees => "gradient_boosted_trees",
            Family::SvmLinear => "svm_linear",
            Family::DeepM1 => "deep_m1",
            Family::DeepM2 => "deep_m2",
            Family::DeepM3 => "deep_m3",
        }
    }

    /// Name used in report rows.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::RandomForest => "RF",
            Family::DecisionTree => "DT",
            Family::GradientBoostedTrees => "XGBoost",
            Family::SvmLinear => "SVM-LR",
            Family::DeepM1 => "DeepM1",
            Family::DeepM2 => "DeepM2",
            Family::DeepM3 => "DeepM3",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s || f.display_name().eq_ignore_ascii_case(s))
    }

    pub fn is_deep(self) -> bool {
        matches!(self, Family::DeepM1 | Family::DeepM2 | Family::DeepM3)
    }

    /// Recognized hyperparameter keys with their defaults.
    pub fn default_hyperparameters(self) -> &'static [(&'static str, f64)] {
        match self {
            // max_depth 0 means unlimited
            Family::RandomForest => &[
                ("n_estimators", 100.0),
                ("max_depth", 0.0),
                ("min_samples_split", 2.0),
                ("min_samples_leaf", 1.0),
            ],
            Family::DecisionTree => {
                &[("max_depth", 0.0), ("min_samples_split", 2.0), ("min_samples_leaf", 1.0)]
            }
            Family::GradientBoostedTrees => &[
                ("n_estimators", 100.0),
                ("learning_rate", 0.3),
                ("max_depth", 6.0),
                ("lambda", 1.0),
                ("min_child_weight", 1.0),
            ],
            Family::SvmLinear => &[("c", 1.0), ("max_iter", 1000.0), ("tol", 1e-4)],
            Family::DeepM1 | Family::DeepM2 | Family::DeepM3 => &[
                ("maxlen", DEFAULT_MAXLEN as f64),
                ("embedding_dim", 100.0),
                ("noise_std", 0.1),
                ("dropout", 0.25),
            ],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScheme {
    Bow,
    Tfidf,
    EmbeddingMean,
    Sequence,
}

impl FeatureScheme {
    pub const ALL: [FeatureScheme; 4] =
        [FeatureScheme::Bow, FeatureScheme::Tfidf, FeatureScheme::EmbeddingMean, FeatureScheme::Sequence];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureScheme::Bow => "bow",
            FeatureScheme::Tfidf => "tfidf",
            FeatureScheme::EmbeddingMean => "embedding_mean",
            FeatureScheme::Sequence => "sequence",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            FeatureScheme::Bow => "BoW",
            FeatureScheme::Tfidf => "TF-IDF",
            FeatureScheme::EmbeddingMean => "GloVe",
            FeatureScheme::Sequence => "Sequence",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureScheme> {
        FeatureScheme::ALL
            .into_iter()
            .find(|f| f.as_str() == s || f.display_name().eq_ignore_ascii_case(s))
    }

    pub fn vector_scheme(self) -> Option<VectorScheme> {
        match self {
            FeatureScheme::Bow => Some(VectorScheme::Bow),
            FeatureScheme::Tfidf => Some(VectorScheme::Tfidf),
            FeatureScheme::EmbeddingMean => Some(VectorScheme::EmbeddingMean),
            FeatureScheme::Sequence => None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{family} cannot use the {scheme} feature scheme")]
    InvalidCombination { family: &'static str, scheme: &'static str },
    #[error("{family} has no hyperparameter {key:?}")]
    UnknownHyperparameter { family: &'static str, key: String },
    #[error("hyperparameter {key} = {value} is out of range")]
    InvalidHyperparameter { key: String, value: f64 },
    #[error("invalid training configuration: {0}")]
    InvalidTrainConfig(&'static str),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{0} feature rows but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("model expects {expected} features, got {found}")]
    SchemeMismatch { expected: &'static str, found: &'static str },
    #[error("model expects width {expected}, got {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("the embedding_mean scheme needs an embedding table")]
    MissingEmbeddings,
    #[error("sequence index {index} is outside the vocabulary of {vocab}")]
    IndexOutOfRange { index: u32, vocab: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub feature_scheme: FeatureScheme,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: Family, feature_scheme: FeatureScheme, seed: u64) -> Self {
        ModelSpec { family, feature_scheme, hyperparameters: BTreeMap::new(), seed }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyperparameters.insert(key.into(), value);
        self
    }

    /// The fifteen configurations in report order.
    pub fn all(seed: u64) -> Vec<ModelSpec> {
        let classical = [
            Family::RandomForest,
            Family::DecisionTree,
            Family::GradientBoostedTrees,
            Family::SvmLinear,
        ];
        let mut out = Vec::new();
        for scheme in [FeatureScheme::Bow, FeatureScheme::Tfidf, FeatureScheme::EmbeddingMean] {
            for f in classical {
                out.push(ModelSpec::new(f, scheme, seed));
            }
        }
        for f in [Family::DeepM1, Family::DeepM2, Family::DeepM3] {
            out.push(ModelSpec::new(f, FeatureScheme::Sequence, seed));
        }
        out
    }

    /// Parses a report name such as `TF-IDF+DT` or `DeepM2`.
    pub fn parse_name(name: &str, seed: u64) -> Result<ModelSpec, ModelError> {
        let unknown = || ModelError::UnknownModel(name.into());
        let spec = match name.split_once('+') {
            Some((scheme, family)) => {
                let scheme = FeatureScheme::parse(scheme.trim()).ok_or_else(unknown)?;
                let family = Family::parse(family.trim()).ok_or_else(unknown)?;
                ModelSpec::new(family, scheme, seed)
            }
            None => {
                let family = Family::parse(name.trim()).ok_or_else(unknown)?;
                ModelSpec::new(family, FeatureScheme::Sequence, seed)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> String {
        if self.family.is_deep() {
            self.family.display_name().into()
        } else {
            format!("{}+{}", self.feature_scheme.display_name(), self.family.display_name())
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.family.is_deep() != (self.feature_scheme == FeatureScheme::Sequence) {
            return Err(ModelError::InvalidCombination {
                family: self.family.as_str(),
                scheme: self.feature_scheme.as_str(),
            });
        }
        let defaults = self.family.default_hyperparameters();
        for (k, &v) in &self.hyperparameters {
            if !defaults.iter().any(|(d, _)| d == k) {
                return Err(ModelError::UnknownHyperparameter {
                    family: self.family.as_str(),
                    key: k.clone(),
                });
            }
            let ok = match k.as_str() {
                "dropout" => (0.0..1.0).contains(&v),
                "noise_std" | "max_depth" | "lambda" | "min_child_weight" => v >= 0.0,
                "learning_rate" | "c" | "tol" => v > 0.0,
                _ => v >= 1.0,
            };
            if !ok || !v.is_finite() {
                return Err(ModelError::InvalidHyperparameter { key: k.clone(), value: v });
            }
        }
        Ok(())
    }

    pub fn hyperparameter(&self, key: &str) -> f64 {
        self.hyperparameters.get(key).copied().unwrap_or_else(|| {
            self.family
                .default_hyperparameters()
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        })
    }

    /// Every recognized hyperparameter with overrides applied.
    pub fn resolved_hyperparameters(&self) -> BTreeMap<String, f64> {
        self.family
            .default_hyperparameters()
            .iter()
            .map(|(k, _)| (k.to_string(), self.hyperparameter(k)))
            .collect()
    }

    fn int(&self, key: &str) -> usize {
        self.hyperparameter(key) as usize
    }

    fn depth(&self) -> Option<usize> {
        Some(self.int("max_depth")).filter(|&d| d > 0)
    }

    fn architecture(&self) -> Option<DeepArchitecture> {
        let mut arch = match self.family {
            Family::DeepM1 => DeepArchitecture::deep_m1(),
            Family::DeepM2 => DeepArchitecture::deep_m2(),
            Family::DeepM3 => DeepArchitecture::deep_m3(),
            _ => return None,
        };
        arch.maxlen = self.int("maxlen");
        arch.embedding_dim = self.int("embedding_dim");
        arch.noise_std = self.hyperparameter("noise_std");
        arch.dropout = self.hyperparameter("dropout");
        Some(arch)
    }
}

/// An unfitted model: the validated spec and, for deep families, the layer
/// graph's shape trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBlueprint {
    pub spec: ModelSpec,
    pub architecture: Option<DeepArchitecture>,
    pub shape_trace: Vec<Vec<usize>>,
}

pub fn build_model(spec: &ModelSpec) -> Result<ModelBlueprint, ModelError> {
    spec.validate()?;
    let architecture = spec.architecture();
    let shape_trace = match &architecture {
        Some(arch) => {
            let trace = arch.shape_trace();
            // pooling floors each time
            let mut steps = arch.maxlen;
            let mut channels = arch.embedding_dim;
            if arch.blocks.contains(&2) {
                for &(_, filters) in &arch.conv_layers {
                    steps /= arch.pool;
                    channels = filters;
                }
            }
            if arch.blocks.contains(&3) {
                channels = 2 * arch.lstm_hidden;
            }
            if arch.blocks.contains(&4) {
                channels = arch.dense_units;
            }
            assert!(trace.contains(&alloc::vec![steps, channels]), "shape trace {trace:?}");
            let flat = if arch.blocks.contains(&4) { steps * arch.dense_units } else { steps * channels };
            assert!(trace.contains(&alloc::vec![flat]), "shape trace {trace:?}");
            assert_eq!(trace.last(), Some(&alloc::vec![1]));
            trace
        }
        None => Vec::new(),
    };
    Ok(ModelBlueprint { spec: spec.clone(), architecture, shape_trace })
}

/// Feature extraction state fitted on the training split only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Featurizer {
    Bow { vocab: Vocabulary },
    Tfidf { vocab: Vocabulary, idf: IdfWeights },
    /// The pretrained table restricted to the training vocabulary.
    Embedding { table: EmbeddingTable },
    Sequence { vocab: Vocabulary, maxlen: usize },
}

/// Model input in one of the two shapes.
#[derive(Clone, Debug, PartialEq)]
pub enum Features {
    Matrix(FeatureMatrix),
    Sequences(Vec<TokenSequence>),
}

impl Features {
    pub fn len(&self) -> usize {
        match self {
            Features::Matrix(m) => m.n_rows(),
            Features::Sequences(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn scheme_name(&self) -> &'static str {
        match self {
            Features::Matrix(m) => match m.scheme {
                VectorScheme::Bow => "bow",
                VectorScheme::Tfidf => "tfidf",
                VectorScheme::EmbeddingMean => "embedding_mean",
            },
            Features::Sequences(_) => "sequence",
        }
    }
}

impl Featurizer {
    pub fn fit(
        spec: &ModelSpec,
        tokens: &[TokenList],
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Featurizer, ModelError> {
        let vocab = Vocabulary::build(tokens)?;
        Ok(match spec.feature_scheme {
            FeatureScheme::Bow => Featurizer::Bow { vocab },
            FeatureScheme::Tfidf => {
                let idf = IdfWeights::fit(tokens, &vocab);
                Featurizer::Tfidf { vocab, idf }
            }
            FeatureScheme::EmbeddingMean => {
                let table = embeddings.ok_or(ModelError::MissingEmbeddings)?;
                Featurizer::Embedding { table: table.restrict_to(&vocab) }
            }
            FeatureScheme::Sequence => Featurizer::Sequence { vocab, maxlen: spec.int("maxlen") },
        })
    }

    pub fn scheme(&self) -> FeatureScheme {
        match self {
            Featurizer::Bow { .. } => FeatureScheme::Bow,
            Featurizer::Tfidf { .. } => FeatureScheme::Tfidf,
            Featurizer::Embedding { .. } => FeatureScheme::EmbeddingMean,
            Featurizer::Sequence { .. } => FeatureScheme::Sequence,
        }
    }

    /// Feature width, or the padded length for sequences.
    pub fn width(&self) -> usize {
        match self {
            Featurizer::Bow { vocab } | Featurizer::Tfidf { vocab, .. } => vocab.len(),
            Featurizer::Embedding { table } => table.dimension(),
            Featurizer::Sequence { maxlen, .. } => *maxlen,
        }
    }

    pub fn transform(&self, tokens: &[TokenList]) -> Features {
        match self {
            Featurizer::Bow { vocab } => Features::Matrix(bow_vectorize(tokens, vocab)),
            Featurizer::Tfidf { vocab, idf } => Features::Matrix(idf.transform(tokens, vocab)),
            Featurizer::Embedding { table } => Features::Matrix(embedding_vectorize(tokens, table)),
            Featurizer::Sequence { vocab, maxlen } => Features::Sequences(
                tokens.iter().map(|t| encode_sequence(t, vocab, *maxlen)).collect(),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    Tree(Tree),
    Forest(RandomForest),
    Boosted(BoostedTrees),
    Svm(LinearSvm),
    Deep(Network),
    /// Fallback for single-class training data.
    Constant { score: f64 },
}

/// Labels and positive-class scores in `[0, 1]`; `labels[i]` is security
/// exactly when `scores[i] > 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub labels: Vec<Label>,
    pub scores: Vec<f64>,
}

impl Predictions {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        Predictions { labels: scores.iter().map(|&s| Label::from_bool(s > 0.5)).collect(), scores }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub featurizer: Featurizer,
    pub estimator: Estimator,
    /// Per-epoch history for deep models.
    pub training_log: Option<TrainingLog>,
    pub warnings: Vec<String>,
}

/// Fits the featurizer and estimator on the given training split.
pub fn fit(
    spec: &ModelSpec,
    tokens: &[TokenList],
    labels: &[Label],
    config: &TrainConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<TrainedModel, ModelError> {
    spec.validate()?;
    config.validate()?;
    if tokens.len() != labels.len() {
        return Err(ModelError::LengthMismatch(tokens.len(), labels.len()));
    }
    if tokens.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let featurizer = Featurizer::fit(spec, tokens, embeddings)?;
    let y: Vec<bool> = labels.iter().map(|l| l.is_security()).collect();
    let positives = y.iter().filter(|&&b| b).count();
    let mut warnings = Vec::new();
    if positives == 0 || positives == y.len() {
        let score = if positives == 0 { 0.0 } else { 1.0 };
        warnings.push(format!(
            "training set holds a single class; fitted a constant model with score {score}"
        ));
        return Ok(TrainedModel {
            spec: spec.clone(),
            featurizer,
            estimator: Estimator::Constant { score },
            training_log: None,
            warnings,
        });
    }
    let features = featurizer.transform(tokens);
    let mut training_log = None;
    let estimator = match features {
        Features::Matrix(m) => fit_classical(spec, &m, &y),
        Features::Sequences(seqs) => {
            let (net, log) = fit_deep(spec, &featurizer, &seqs, &y, config);
            training_log = Some(log);
            Estimator::Deep(net)
        }
    };
    Ok(TrainedModel { spec: spec.clone(), featurizer, estimator, training_log, warnings })
}

fn fit_classical(spec: &ModelSpec, m: &FeatureMatrix, y: &[bool]) -> Estimator {
    let width = m.width();
    let rows = &m.rows;
    match spec.family {
        Family::DecisionTree => Estimator::Tree(tree::fit_classification_tree(
            rows,
            width,
            y,
            &alloc::vec![1.0; rows.len()],
            tree::GrowParams {
                max_depth: spec.depth(),
                min_samples_split: spec.hyperparameter("min_samples_split"),
            },
            spec.hyperparameter("min_samples_leaf"),
            &mut |f| f,
        )),
        Family::RandomForest => {
            let params = ForestParams {
                n_estimators: spec.int("n_estimators"),
                max_depth: spec.depth(),
                min_samples_split: spec.int("min_samples_split"),
                min_samples_leaf: spec.int("min_samples_leaf"),
            };
            Estimator::Forest(RandomForest::fit(rows, width, y, &params, spec.seed))
        }
        Family::GradientBoostedTrees => {
            let params = BoostingParams {
                n_estimators: spec.int("n_estimators"),
                learning_rate: spec.hyperparameter("learning_rate"),
                max_depth: spec.int("max_depth"),
                lambda: spec.hyperparameter("lambda"),
                min_child_weight: spec.hyperparameter("min_child_weight"),
            };
            Estimator::Boosted(BoostedTrees::fit(rows, width, y, &params))
        }
        Family::SvmLinear => {
            let params = SvmParams {
                c: spec.hyperparameter("c"),
                max_iter: spec.int("max_iter"),
                tol: spec.hyperparameter("tol"),
            };
            Estimator::Svm(LinearSvm::fit(rows, width, y, &params, spec.seed))
        }
        _ => unreachable!("validated spec"),
    }
}

/// Stratified hold-out: every `1/fraction`-th example of each class, after a
/// seeded shuffle, goes to validation.
pub fn validation_split(y: &[bool], fraction: f64, seed_value: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut rng = seed::rng_for(seed_value, 0x0056_414c);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_val = libm::round(idx.len() as f64 * fraction) as usize;
        let n_val = if idx.len() > 1 { n_val.max(1).min(idx.len() - 1) } else { 0 };
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn fit_deep(
    spec: &ModelSpec,
    featurizer: &Featurizer,
    seqs: &[TokenSequence],
    y: &[bool],
    config: &TrainConfig,
) -> (Network, TrainingLog) {
    let Featurizer::Sequence { vocab, .. } = featurizer else { unreachable!() };
    let arch = spec.architecture().expect("deep family");
    let mut rng = seed::rng_for(spec.seed, 1);
    let mut net = Network::new(arch.layers(vocab.len() + 1), arch.maxlen, &mut rng);
    let (tr, va) = validation_split(y, config.validation_fraction, spec.seed);
    let pick = |ix: &[usize]| -> Vec<(&[u32], bool)> {
        ix.iter().map(|&i| (seqs[i].indices.as_slice(), y[i])).collect()
    };
    let log = nn::train_network(&mut net, &pick(&tr), &pick(&va), config);
    (net, log)
}

impl TrainedModel {
    pub fn name(&self) -> String {
        self.spec.name()
    }

    pub fn transform(&self, tokens: &[TokenList]) -> Features {
        self.featurizer.transform(tokens)
    }

    pub fn predict(&self, tokens: &[TokenList]) -> Predictions {
        self.predict_features(&self.transform(tokens)).expect("own featurizer output")
    }

    /// Scores precomputed features, checking they match the training scheme
    /// and width.
    pub fn predict_features(&self, features: &Features) -> Result<Predictions, ModelError> {
        let expected = self.featurizer.scheme().as_str();
        if features.scheme_name() != expected {
            return Err(ModelError::SchemeMismatch { expected, found: features.scheme_name() });
        }
        let width = self.featurizer.width();
        let scores = match features {
            Features::Matrix(m) => {
                if m.width() != width {
                    return Err(ModelError::WidthMismatch { expected: width, found: m.width() });
                }
                m.rows.iter().map(|r| self.score_row(r)).collect()
            }
            Features::Sequences(seqs) => {
                let Featurizer::Sequence { vocab, .. } = &self.featurizer else { unreachable!() };
                let mut out = Vec::with_capacity(seqs.len());
                for s in seqs {
                    if s.len() != width {
                        return Err(ModelError::WidthMismatch { expected: width, found: s.len() });
                    }
                    if let Some(&index) = s.indices.iter().find(|&&i| i as usize > vocab.len()) {
                        return Err(ModelError::IndexOutOfRange { index, vocab: vocab.len() });
                    }
                    out.push(match &self.estimator {
                        Estimator::Deep(net) => net.predict_proba(&s.indices),
                        Estimator::Constant { score } => *score,
                        _ => unreachable!("sequence features feed deep models only"),
                    });
                }
                out
            }
        };
        Ok(Predictions::from_scores(scores))
    }

    fn score_row(&self, row: &SparseRow) -> f64 {
        match &self.estimator {
            Estimator::Tree(t) => t.predict(row),
            Estimator::Forest(f) => f.score(row),
            Estimator::Boosted(b) => b.score(row),
            Estimator::Svm(s) => s.score(row),
            Estimator::Constant { score } => *score,
            Estimator::Deep(_) => unreachable!("matrix features feed classical models only"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn doc(s: &str) -> TokenList {
        TokenList::new(s.split_whitespace().map(String::from).collect())
    }

    fn toy() -> (Vec<TokenList>, Vec<Label>) {
        let pos = ["auth token leak", "csrf token check", "password hash salt", "auth password reset"];
        let neg = ["button color theme", "deploy docker image", "readme typo fix", "docker build cache"];
        let mut t = Vec::new();
        let mut l = Vec::new();
        for (p, n) in pos.iter().zip(&neg).cycle().take(16) {
            t.push(doc(p));
            l.push(Label::Security);
            t.push(doc(n));
            l.push(Label::NonSecurity);
        }
        (t, l)
    }

    #[test]
    fn fifteen_named_configurations() {
        let all = ModelSpec::all(1);
        assert_eq!(all.len(), 15);
        let names: Vec<String> = all.iter().map(ModelSpec::name).collect();
        assert_eq!(names[0], "BoW+RF");
        assert_eq!(names[6], "TF-IDF+XGBoost");
        assert_eq!(names[11], "GloVe+SVM-LR");
        assert_eq!(names[12..], ["DeepM1", "DeepM2", "DeepM3"]);
        for s in &all {
            s.validate().unwrap();
            assert_eq!(&ModelSpec::parse_name(&s.name(), 1).unwrap(), s);
        }
    }

    #[test]
    fn invalid_combinations() {
        let e = build_model(&ModelSpec::new(Family::DecisionTree, FeatureScheme::Sequence, 0));
        assert!(matches!(e, Err(ModelError::InvalidCombination { .. })));
        let e = build_model(&ModelSpec::new(Family::DeepM1, FeatureScheme::Bow, 0));
        assert!(matches!(e, Err(ModelError::InvalidCombination { .. })));
        let s = ModelSpec::new(Family::SvmLinear, FeatureScheme::Bow, 0).with("depth", 3.0);
        assert!(matches!(s.validate(), Err(ModelError::UnknownHyperparameter { .. })));
        let s = ModelSpec::new(Family::DeepM1, FeatureScheme::Sequence, 0).with("dropout", 1.0);
        assert!(matches!(s.validate(), Err(ModelError::InvalidHyperparameter { .. })));
    }

    #[test]
    fn build_deep_blueprints() {
        let b = build_model(&ModelSpec::new(Family::DeepM3, FeatureScheme::Sequence, 0)).unwrap();
        assert!(b.shape_trace.contains(&vec![2000]));
        let b = build_model(&ModelSpec::new(Family::DeepM2, FeatureScheme::Sequence, 0)).unwrap();
        assert!(b.shape_trace.contains(&vec![360]));
        let b = build_model(&ModelSpec::new(Family::DecisionTree, FeatureScheme::Bow, 0)).unwrap();
        assert!(b.shape_trace.is_empty());
    }

    #[test]
    fn decision_tree_memorizes_toy_bow() {
        let (t, l) = toy();
        let spec = ModelSpec::new(Family::DecisionTree, FeatureScheme::Bow, 0);
        let m = fit(&spec, &t, &l, &TrainConfig::default(), None).unwrap();
        assert_eq!(m.predict(&t).labels, l);
    }

    #[test]
    fn classical_models_fit_toy_data() {
        let (t, l) = toy();
        for family in [Family::RandomForest, Family::GradientBoostedTrees, Family::SvmLinear] {
            for scheme in [FeatureScheme::Bow, FeatureScheme::Tfidf] {
                let spec = ModelSpec::new(family, scheme, 9).with("n_estimators", 20.0);
                let spec = if family == Family::SvmLinear {
                    ModelSpec::new(family, scheme, 9)
                } else {
                    spec
                };
                let m = fit(&spec, &t, &l, &TrainConfig::default(), None).unwrap();
                let p = m.predict(&t);
                assert_eq!(p.labels, l, "{}", spec.name());
                let again = fit(&spec, &t, &l, &TrainConfig::default(), None).unwrap();
                assert_eq!(again.predict(&t), p);
            }
        }
    }

    #[test]
    fn embedding_scheme_needs_table() {
        let (t, l) = toy();
        let spec = ModelSpec::new(Family::DecisionTree, FeatureScheme::EmbeddingMean, 0);
        let e = fit(&spec, &t, &l, &TrainConfig::default(), None);
        assert_eq!(e.unwrap_err(), ModelError::MissingEmbeddings);
        let mut table = EmbeddingTable::new(2);
        table.insert("auth".into(), vec![1.0, 0.0]).unwrap();
        table.insert("password".into(), vec![0.8, 0.1]).unwrap();
        table.insert("docker".into(), vec![0.0, 1.0]).unwrap();
        table.insert("unused".into(), vec![5.0, 5.0]).unwrap();
        let m = fit(&spec, &t, &l, &TrainConfig::default(), Some(&table)).unwrap();
        let Featurizer::Embedding { table: kept } = &m.featurizer else { panic!() };
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn single_class_and_empty_training_sets() {
        let t = vec![doc("a b"), doc("c")];
        let l = vec![Label::Security; 2];
        let spec = ModelSpec::new(Family::SvmLinear, FeatureScheme::Bow, 0);
        let m = fit(&spec, &t, &l, &TrainConfig::default(), None).unwrap();
        assert_eq!(m.estimator, Estimator::Constant { score: 1.0 });
        assert_eq!(m.warnings.len(), 1);
        assert!(m.predict(&[doc("z")]).labels == vec![Label::Security]);
        let e = fit(&spec, &[], &[], &TrainConfig::default(), None);
        assert_eq!(e.unwrap_err(), ModelError::EmptyTrainingSet);
    }

    #[test]
    fn predict_checks_scheme_and_width() {
        let (t, l) = toy();
        let spec = ModelSpec::new(Family::DecisionTree, FeatureScheme::Tfidf, 0);
        let m = fit(&spec, &t, &l, &TrainConfig::default(), None).unwrap();
        let vocab = Vocabulary::build(&t[..2]).unwrap();
        let wrong_scheme = Features::Matrix(bow_vectorize(&t, &vocab));
        assert!(matches!(m.predict_features(&wrong_scheme), Err(ModelError::SchemeMismatch { .. })));
        let narrow = Features::Matrix(IdfWeights::fit(&t, &vocab).transform(&t, &vocab));
        assert!(matches!(m.predict_features(&narrow), Err(ModelError::WidthMismatch { .. })));
        let seqs = Features::Sequences(vec![]);
        assert!(matches!(m.predict_features(&seqs), Err(ModelError::SchemeMismatch { .. })));
    }

    #[test]
    fn validation_split_is_stratified() {
        let y: Vec<bool> = (0..100).map(|i| i % 5 == 0).collect();
        let (tr, va) = validation_split(&y, 0.1, 3);
        assert_eq!(tr.len() + va.len(), 100);
        assert_eq!(va.len(), 10);
        assert_eq!(va.iter().filter(|&&i| y[i]).count(), 2);
        assert_eq!(validation_split(&y, 0.1, 3), (tr, va));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scores_in_unit_interval_and_threshold(
            words in proptest::collection::vec(proptest::collection::vec(0u8..12, 0..8), 4..20),
            family in 0usize..4,
        ) {
            let tokens: Vec<TokenList> = words
                .iter()
                .map(|w| TokenList::new(w.iter().map(|c| format!("w{c}")).collect()))
                .collect();
            let labels: Vec<Label> = words.iter().map(|w| Label::from_bool(w.contains(&3))).collect();
            let fam = [Family::RandomForest, Family::DecisionTree, Family::GradientBoostedTrees, Family::SvmLinear][family];
            let spec = ModelSpec::new(fam, FeatureScheme::Tfidf, 4).with(
                if fam == Family::SvmLinear { "max_iter" } else if fam == Family::DecisionTree { "min_samples_split" } else { "n_estimators" },
                10.0,
            );
            if let Ok(m) = fit(&spec, &tokens, &labels, &TrainConfig::default(), None) {
                let p = m.predict(&tokens);
                for (s, l) in p.scores.iter().zip(&p.labels) {
                    prop_assert!((0.0..=1.0).contains(s));
                    prop_assert_eq!(l.is_security(), *s > 0.5);
                }
            }
        }
    }
}
