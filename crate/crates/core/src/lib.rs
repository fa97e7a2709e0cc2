//! Security-discussion classification for developer paragraphs.
//!
//! This crate holds the allocation-only algorithmic core: the paragraph data
//! model, text normalization, feature extraction, the classical and neural
//! classifiers, the keyword baseline and the evaluation harness. File formats,
//! network ingestion and the command line live in the `secdisc` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod classifiers;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod preprocess;
pub mod seed;

pub use baseline::{KeywordBaseline, KeywordLexicon, KeywordScore};
pub use classifiers::{Family, FeatureScheme, ModelSpec, Predictions, TrainConfig, TrainedModel};
pub use corpus::{Dataset, Label, LabeledParagraph, Paragraph, RawDocument, Source};
pub use eval::{ConfusionMatrix, MetricsRow};
pub use features::{EmbeddingTable, FeatureMatrix, TokenSequence, Vocabulary};
pub use preprocess::{PreprocessConfig, TokenList};

/// Any error raised by the core pipeline.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Resource(#[from] preprocess::ResourceError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Model(#[from] classifiers::ModelError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Baseline(#[from] baseline::BaselineError),
}
