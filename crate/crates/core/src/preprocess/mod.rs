//! Text normalization: noise removal, contraction expansion, symbol
//! stripping, stop-word removal and stemming.
//!
//! The effective order is noise → contractions → symbols → tokenize →
//! stop words → stem. Contractions must be expanded while apostrophes are
//! still present, so symbol stripping is split off from the rest of cleaning.

mod porter;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Paragraph;

pub use porter::{porter_stem, step2_only};

pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
pub const DEFAULT_CONTRACTIONS: &str = include_str!("../../data/contractions_en.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResourceError {
    #[error("line {line}: expected \"short<TAB>full\"")]
    MalformedContraction { line: usize },
    #[error("contraction key {0:?} is not lowercase")]
    UppercaseKey(String),
    #[error("stop-word list is empty but stop-word removal is enabled")]
    NoStopwords,
}

/// Lines of a resource file with `#` comments and blanks removed, paired with
/// their 1-based line numbers.
pub fn resource_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    resource_lines(text).map(|(_, l)| l.trim().to_lowercase()).collect()
}

pub fn parse_contractions(text: &str) -> Result<BTreeMap<String, String>, ResourceError> {
    let mut map = BTreeMap::new();
    for (line, l) in resource_lines(text) {
        let (short, full) = l
            .split_once('\t')
            .ok_or(ResourceError::MalformedContraction { line })?;
        let short = normalize_apostrophes(short.trim());
        if short.is_empty() || full.trim().is_empty() {
            return Err(ResourceError::MalformedContraction { line });
        }
        map.insert(short, full.trim().to_string());
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Steps {
    pub clean: bool,
    pub expand_contractions: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
}

impl Default for Steps {
    fn default() -> Self {
        Steps { clean: true, expand_contractions: true, remove_stopwords: true, stem: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    pub contractions: BTreeMap<String, String>,
    pub lowercase: bool,
    pub steps: Steps,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            contractions: parse_contractions(DEFAULT_CONTRACTIONS)
                .expect("bundled contraction table parses"),
            lowercase: true,
            steps: Steps::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn new(
        stopwords: BTreeSet<String>,
        contractions: BTreeMap<String, String>,
    ) -> Result<Self, ResourceError> {
        let cfg = PreprocessConfig { stopwords, contractions, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ResourceError> {
        if let Some(k) = self.contractions.keys().find(|k| k.to_lowercase() != **k) {
            return Err(ResourceError::UppercaseKey(k.clone()));
        }
        if self.steps.remove_stopwords && self.stopwords.is_empty() {
            return Err(ResourceError::NoStopwords);
        }
        Ok(())
    }
}

/// Ordered tokens of one preprocessed paragraph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenList {
    pub tokens: Vec<String>,
}

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenList { tokens: tokens.into_iter().filter(|t| !t.is_empty()).collect() }
    }

    pub fn from_words(words: &[&str]) -> Self {
        TokenList::new(words.iter().map(|w| w.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

fn normalize_apostrophes(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '\u{2019}' | '\u{2018}' | '\u{02BC}' | '`' => '\'',
            c => c,
        })
        .collect()
}

fn trim_wrapping(chunk: &str) -> &str {
    chunk.trim_matches(|c: char| !c.is_alphanumeric())
}

fn is_url(chunk: &str) -> bool {
    let c = chunk.trim_start_matches(|c: char| !c.is_alphanumeric());
    let lower = c.to_ascii_lowercase();
    chunk.contains("://") || lower.starts_with("www.")
}

fn is_email(chunk: &str) -> bool {
    let c = trim_wrapping(chunk);
    let Some((local, domain)) = c.split_once('@') else { return false };
    if local.is_empty() || domain.is_empty() {
        return false;
    }
    match domain.rsplit_once('.') {
        Some((host, tld)) => !host.is_empty() && !tld.is_empty(),
        None => false,
    }
}

/// Drops URL and email chunks, normalizes apostrophes and whitespace, and
/// lowercases. Apostrophes survive so contractions can still be expanded.
pub fn strip_noise(text: &str, lowercase: bool) -> String {
    let text = normalize_apostrophes(text);
    let mut out = String::with_capacity(text.len());
    for chunk in text.split_whitespace() {
        if is_url(chunk) || is_email(chunk) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        if lowercase {
            out.push_str(&chunk.to_lowercase());
        } else {
            out.push_str(chunk);
        }
    }
    out
}

/// Removes apostrophes, turns every other non-alphanumeric character (emoji
/// included) into a separator, and collapses whitespace.
pub fn strip_symbols(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c == '\'' {
            continue;
        }
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// Full character cleaning: URLs, emails, emoji and symbols removed,
/// whitespace normalized, lowercased when configured.
pub fn clean_text(text: &str, cfg: &PreprocessConfig) -> String {
    strip_symbols(&strip_noise(text, cfg.lowercase))
}

/// Replaces each contraction by its full form. Words are maximal runs of
/// alphanumerics and apostrophes, matched case-insensitively.
pub fn expand_contractions(text: &str, map: &BTreeMap<String, String>) -> String {
    let text = normalize_apostrophes(text);
    let mut out = String::with_capacity(text.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if word.is_empty() {
            return;
        }
        match map.get(&word.to_lowercase()) {
            Some(full) => out.push_str(full),
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

pub fn remove_stopwords(tokens: &[String], stopwords: &BTreeSet<String>) -> Vec<String> {
    tokens.iter().filter(|t| !stopwords.contains(t.as_str())).cloned().collect()
}

/// Runs the whole pipeline over raw paragraph text.
pub fn preprocess_text(text: &str, cfg: &PreprocessConfig) -> TokenList {
    let s = cfg.steps;
    let mut t = if s.clean { strip_noise(text, cfg.lowercase) } else { text.to_string() };
    if s.expand_contractions {
        t = expand_contractions(&t, &cfg.contractions);
    }
    if s.clean {
        t = strip_symbols(&t);
    }
    let mut tokens: Vec<String> = t.split_whitespace().map(str::to_string).collect();
    if s.remove_stopwords {
        tokens = remove_stopwords(&tokens, &cfg.stopwords);
    }
    if s.stem {
        tokens = tokens.iter().map(|t| porter_stem(t)).collect();
        if s.remove_stopwords {
            // A stem can land on a stop word ("ons" -> "on").
            tokens.retain(|t| !cfg.stopwords.contains(t.as_str()));
        }
    }
    TokenList::new(tokens)
}

pub fn preprocess(paragraph: &Paragraph, cfg: &PreprocessConfig) -> TokenList {
    preprocess_text(&paragraph.text, cfg)
}

/// Tokens that the stemmer would still change; `porter_stem` is not
/// idempotent on every word, so callers log these instead of asserting.
pub fn unstable_stems(tokens: &TokenList) -> Vec<&str> {
    tokens.iter().filter(|t| porter_stem(t) != *t).collect()
}
