//! Fetching discussions from GitHub and Stack Exchange (live or from local
//! dumps), code stripping and paragraph segmentation.

mod code;
pub mod github;
mod segment;
pub mod stackexchange;

use secdisc_core::corpus::CorpusError;
use secdisc_core::{Paragraph, RawDocument};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use code::strip_code;
pub use segment::{html_text, sample_paragraphs, split_paragraphs};

pub const TOKEN_VAR: &str = "GITHUB_TOKEN";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    #[default]
    GithubRepo,
    StackexchangeTagged,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IssueState {
    Open,
    Closed,
    #[default]
    All,
}

impl IssueState {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueState::Open => "open",
            IssueState::Closed => "closed",
            IssueState::All => "all",
        }
    }

    pub fn admits(self, state: &str) -> bool {
        self == IssueState::All || self.as_str() == state
    }
}

/// What to fetch. `tag_filters` applies to Stack Exchange only: every entry
/// must match at least one tag of a question, and an entry may list
/// `|`-separated alternatives, each a glob such as `*secur*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceQuery {
    pub kind: QueryKind,
    pub repo_or_site: String,
    pub tag_filters: Vec<String>,
    pub issue_state: IssueState,
}

impl SourceQuery {
    pub fn github(repo: &str, issue_state: IssueState) -> Self {
        SourceQuery { kind: QueryKind::GithubRepo, repo_or_site: repo.into(), tag_filters: vec![], issue_state }
    }

    pub fn stackexchange(site: &str, tag_filters: &[&str]) -> Self {
        SourceQuery {
            kind: QueryKind::StackexchangeTagged,
            repo_or_site: site.into(),
            tag_filters: tag_filters.iter().map(|s| s.to_string()).collect(),
            issue_state: IssueState::All,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        match self.kind {
            QueryKind::GithubRepo => {
                let ok = matches!(self.repo_or_site.split_once('/'), Some((o, n)) if !o.is_empty() && !n.is_empty() && !n.contains('/'));
                if !ok {
                    return Err(IngestError::BadRepo(self.repo_or_site.clone()));
                }
            }
            QueryKind::StackexchangeTagged => {
                if self.tag_filters.is_empty() {
                    return Err(IngestError::NoTagFilters);
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Credentials {
    pub token: Option<String>,
}

impl Credentials {
    pub fn from_env() -> Self {
        Credentials { token: std::env::var(TOKEN_VAR).ok().filter(|t| !t.is_empty()) }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub documents_fetched: usize,
    pub paragraphs_emitted: usize,
    pub code_blocks_removed: usize,
    pub errors: Vec<String>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("repository must be owner/name, got {0:?}")]
    BadRepo(String),
    #[error("at least one tag filter is required")]
    NoTagFilters,
    #[error("tag {0:?} does not occur in the dump")]
    UnknownTag(String),
    #[error("GitHub rejected the credentials (HTTP 401)")]
    AuthFailed,
    #[error("rate limit exhausted; retry after {retry_after_secs} s")]
    RateLimited { retry_after_secs: u64 },
    #[error("repository {0} not found")]
    RepoNotFound(String),
    #[error("HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("{path}: malformed payload: {message}")]
    Malformed { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot sample {n} of {population} paragraphs")]
    SampleTooLarge { n: usize, population: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.display().to_string(), source }
}

/// Strips code from and segments every document. Invalid documents are
/// skipped and reported.
pub fn ingest_documents(docs: &[RawDocument]) -> (Vec<Paragraph>, IngestReport) {
    let mut report = IngestReport { documents_fetched: docs.len(), ..IngestReport::default() };
    let mut out = Vec::new();
    for doc in docs {
        if let Err(e) = doc.validate() {
            report.errors.push(e.to_string());
            continue;
        }
        let (body, removed) = strip_code(&doc.body);
        report.code_blocks_removed += removed;
        let stripped = RawDocument { body, ..doc.clone() };
        out.extend(split_paragraphs(&stripped));
    }
    report.paragraphs_emitted = out.len();
    (out, report)
}
