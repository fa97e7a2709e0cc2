//! Discussions, paragraphs, labels and datasets.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("document id is empty")]
    EmptyDocumentId,
    #[error("document {0} has an empty body but is not flagged as a placeholder")]
    EmptyBody(String),
    #[error("paragraph {0} has empty text")]
    EmptyParagraph(String),
    #[error("non-security paragraph {0} lists security words")]
    WordsOnNegative(String),
    #[error("duplicate paragraph id {0}")]
    DuplicateId(String),
    #[error("duplicate (document, position) pair ({0}, {1})")]
    DuplicatePosition(String, u32),
    #[error("unknown source {0:?}")]
    UnknownSource(String),
    #[error("invalid label {0:?}, expected 0 or 1")]
    InvalidLabel(String),
}

/// Where a discussion was mined from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    GithubIssue,
    SoQuestion,
    SoAnswer,
    SoComment,
    StackexchangePost,
}

impl Source {
    pub const ALL: [Source; 5] = [
        Source::GithubIssue,
        Source::SoQuestion,
        Source::SoAnswer,
        Source::SoComment,
        Source::StackexchangePost,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::GithubIssue => "github_issue",
            Source::SoQuestion => "so_question",
            Source::SoAnswer => "so_answer",
            Source::SoComment => "so_comment",
            Source::StackexchangePost => "stackexchange_post",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CorpusError> {
        Source::ALL
            .into_iter()
            .find(|src| src.as_str() == s)
            .ok_or_else(|| CorpusError::UnknownSource(s.into()))
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An issue body, comment, question, answer or post as fetched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub source: Source,
    pub project: String,
    pub url: String,
    pub body: String,
    pub created_at: Option<String>,
    /// Set for documents whose body is legitimately empty (deleted comments and the like).
    pub placeholder: bool,
}

impl RawDocument {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(CorpusError::EmptyDocumentId);
        }
        if self.body.is_empty() && !self.placeholder {
            return Err(CorpusError::EmptyBody(self.id.clone()));
        }
        Ok(())
    }
}

/// One paragraph of a document; the unit that gets classified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub paragraph_id: String,
    pub document_ref: String,
    pub source: Source,
    pub project: String,
    pub url: String,
    pub position: u32,
    pub text: String,
}

impl Paragraph {
    /// The conventional id for the paragraph at `position` of `document_ref`.
    pub fn make_id(document_ref: &str, position: u32) -> String {
        alloc::format!("{document_ref}#{position}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    NonSecurity = 0,
    Security = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::NonSecurity),
            1 => Some(Label::Security),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Result<Label, CorpusError> {
        match s {
            "0" => Ok(Label::NonSecurity),
            "1" => Ok(Label::Security),
            _ => Err(CorpusError::InvalidLabel(s.into())),
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_security(self) -> bool {
        self == Label::Security
    }

    pub fn from_bool(security: bool) -> Label {
        if security {
            Label::Security
        } else {
            Label::NonSecurity
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledParagraph {
    pub paragraph: Paragraph,
    pub label: Label,
    /// Words the annotator marked as security-related. Always empty for negatives.
    pub security_words: Vec<String>,
}

impl LabeledParagraph {
    pub fn new(
        paragraph: Paragraph,
        label: Label,
        security_words: Vec<String>,
    ) -> Result<Self, CorpusError> {
        let lp = LabeledParagraph { paragraph, label, security_words };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.paragraph.text.trim().is_empty() {
            return Err(CorpusError::EmptyParagraph(self.paragraph.paragraph_id.clone()));
        }
        if self.label == Label::NonSecurity && !self.security_words.is_empty() {
            return Err(CorpusError::WordsOnNegative(self.paragraph.paragraph_id.clone()));
        }
        Ok(())
    }

    /// A positive whose annotator left the security-word column blank.
    pub fn security_words_missing(&self) -> bool {
        self.label == Label::Security && self.security_words.is_empty()
    }

    pub fn id(&self) -> &str {
        &self.paragraph.paragraph_id
    }

    pub fn text(&self) -> &str {
        &self.paragraph.text
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub positives: usize,
    pub negatives: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.positives + self.negatives
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub provenance: String,
    records: Vec<LabeledParagraph>,
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate paragraph ids or duplicate
    /// (document, position) pairs.
    pub fn new(
        name: impl Into<String>,
        provenance: impl Into<String>,
        records: Vec<LabeledParagraph>,
    ) -> Result<Self, CorpusError> {
        let mut ids = BTreeSet::new();
        let mut anchors = BTreeSet::new();
        for r in &records {
            r.validate()?;
            let p = &r.paragraph;
            if !ids.insert(p.paragraph_id.as_str()) {
                return Err(CorpusError::DuplicateId(p.paragraph_id.clone()));
            }
            if !anchors.insert((p.document_ref.as_str(), p.position)) {
                return Err(CorpusError::DuplicatePosition(p.document_ref.clone(), p.position));
            }
        }
        Ok(Dataset { name: name.into(), provenance: provenance.into(), records })
    }

    pub fn records(&self) -> &[LabeledParagraph] {
        &self.records
    }

    pub fn into_records(self) -> Vec<LabeledParagraph> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn class_counts(&self) -> ClassCounts {
        class_counts(&self.records)
    }

    /// A new dataset holding the records at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        Dataset {
            name: name.into(),
            provenance: self.provenance.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

pub fn class_counts(records: &[LabeledParagraph]) -> ClassCounts {
    let positives = records.iter().filter(|r| r.label.is_security()).count();
    ClassCounts { positives, negatives: records.len() - positives }
}
