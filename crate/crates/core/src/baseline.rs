//! Keyword-ratio baseline: a paragraph is a security discussion when the
//! share of its tokens covered by lexicon keywords exceeds a threshold.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::eval::{FoldModel, Predictions};
use crate::preprocess::{preprocess_text, resource_lines, PreprocessConfig, TokenList};

pub const DEFAULT_LEXICON: &str = include_str!("../data/security_lexicon.txt");
pub const DEFAULT_ALIASES: &str = include_str!("../data/security_aliases.tsv");
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("lexicon has no usable keywords")]
    EmptyLexicon,
    #[error("alias table line {line}: expected \"variant<TAB>canonical\"")]
    MalformedAlias { line: usize },
}

/// Lowercases and folds hyphens, underscores and whitespace runs to one space.
pub fn fold_variant(s: &str) -> String {
    let lowered = s.to_lowercase();
    let spaced: String =
        lowered.chars().map(|c| if c == '-' || c == '_' { ' ' } else { c }).collect();
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_aliases(text: &str) -> Result<BTreeMap<String, String>, BaselineError> {
    let mut map = BTreeMap::new();
    for (line, l) in resource_lines(text) {
        let (variant, canonical) =
            l.split_once('\t').ok_or(BaselineError::MalformedAlias { line })?;
        let (variant, canonical) = (fold_variant(variant), fold_variant(canonical));
        if variant.is_empty() || canonical.is_empty() {
            return Err(BaselineError::MalformedAlias { line });
        }
        map.insert(variant, canonical);
    }
    Ok(map)
}

/// Canonical keywords, each with the stemmed token sequences that count as
/// an occurrence: the keyword itself and every aliased variant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordLexicon {
    entries: BTreeMap<String, BTreeSet<Vec<String>>>,
    /// Surface form to canonical keyword.
    forms: BTreeMap<Vec<String>, String>,
    longest: usize,
}

impl KeywordLexicon {
    /// Builds the lexicon from keyword lines and an alias table, stemming
    /// both with `cfg` so they match preprocessed paragraphs. Keywords that
    /// preprocess to nothing (all stop words) are dropped.
    pub fn build(
        lexicon_text: &str,
        aliases: &BTreeMap<String, String>,
        cfg: &PreprocessConfig,
    ) -> Result<Self, BaselineError> {
        let stem = |s: &str| -> Vec<String> { preprocess_text(s, cfg).tokens };
        let mut entries: BTreeMap<String, BTreeSet<Vec<String>>> = BTreeMap::new();
        for (_, l) in resource_lines(lexicon_text) {
            let folded = fold_variant(l);
            let canonical = aliases.get(&folded).unwrap_or(&folded);
            let key = stem(canonical);
            if key.is_empty() {
                continue;
            }
            entries.entry(key.join(" ")).or_default().insert(key);
        }
        if entries.is_empty() {
            return Err(BaselineError::EmptyLexicon);
        }
        for (variant, canonical) in aliases {
            let key = stem(canonical).join(" ");
            if let Some(forms) = entries.get_mut(&key) {
                let form = stem(variant);
                if !form.is_empty() {
                    forms.insert(form);
                }
            }
        }
        let mut forms = BTreeMap::new();
        for (k, fs) in &entries {
            for f in fs {
                forms.entry(f.clone()).or_insert_with(|| k.clone());
            }
        }
        let longest = forms.keys().map(Vec::len).max().unwrap_or(1);
        Ok(KeywordLexicon { entries, forms, longest })
    }

    /// The bundled seed lexicon and alias table.
    pub fn seed(cfg: &PreprocessConfig) -> Self {
        let aliases = parse_aliases(DEFAULT_ALIASES).expect("bundled alias table parses");
        Self::build(DEFAULT_LEXICON, &aliases, cfg).expect("bundled lexicon is non-empty")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical keywords in stemmed, space-joined form.
    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains(&self, keyword: &str) -> bool {
        self.entries.contains_key(keyword)
    }

    /// Whether `token` occurs anywhere in any surface form.
    pub fn mentions(&self, token: &str) -> bool {
        self.forms.keys().any(|f| f.iter().any(|t| t == token))
    }

    /// Greedy left-to-right longest matches: `(start, len)` of each.
    pub fn matches(&self, tokens: &[String]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let max = self.longest.min(tokens.len() - i);
            let hit = (1..=max).rev().find(|&n| self.forms.contains_key(&tokens[i..i + n]));
            match hit {
                Some(n) => {
                    out.push((i, n));
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeywordScore {
    /// Tokens covered by keyword occurrences, repeats included.
    pub n_sw: usize,
    pub n_p: usize,
    /// `n_sw / n_p`, or 0 for an empty paragraph.
    pub pr: f64,
}

pub fn keyword_score(tokens: &TokenList, lexicon: &KeywordLexicon) -> KeywordScore {
    let n_p = tokens.len();
    let n_sw = lexicon.matches(&tokens.tokens).iter().map(|m| m.1).sum();
    let pr = if n_p == 0 { 0.0 } else { n_sw as f64 / n_p as f64 };
    KeywordScore { n_sw, n_p, pr }
}

/// Security exactly when `pr > threshold`; the ratio doubles as the score.
pub fn keyword_classify(tokens: &TokenList, lexicon: &KeywordLexicon, threshold: f64) -> (Label, f64) {
    let pr = keyword_score(tokens, lexicon).pr;
    (Label::from_bool(pr > threshold), pr)
}

/// The keyword rule as a fold model; it ignores the training split.
#[derive(Clone, Debug)]
pub struct KeywordBaseline {
    pub lexicon: KeywordLexicon,
    pub threshold: f64,
}

impl FoldModel for KeywordBaseline {
    fn name(&self) -> String {
        "Keyword".into()
    }

    fn fit_predict(
        &self,
        _train_tokens: &[TokenList],
        _train_labels: &[Label],
        test_tokens: &[TokenList],
        _seed: u64,
    ) -> Result<Predictions, crate::Error> {
        Ok(self.predict(test_tokens))
    }
}

impl KeywordBaseline {
    pub fn predict(&self, tokens: &[TokenList]) -> Predictions {
        let (labels, scores) =
            tokens.iter().map(|t| keyword_classify(t, &self.lexicon, self.threshold)).unzip();
        Predictions { labels, scores }
    }
}
