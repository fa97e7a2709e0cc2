//! Vocabularies and the feature schemes built on them: term counts, TF-IDF,
//! mean-pooled word embeddings and fixed-length index sequences.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::TokenList;

pub const DEFAULT_MAXLEN: usize = 100;
pub const GLOVE_DIMENSION: usize = 300;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("line {line}: expected {expected} values, found {found}")]
    WrongDimension { line: usize, expected: usize, found: usize },
    #[error("line {line}: unparsable value {value:?}")]
    BadValue { line: usize, value: String },
    #[error("line {line}: missing token")]
    MissingToken { line: usize },
}

/// Frequency-ranked word index. Index 0 is reserved for padding; the most
/// frequent word gets 1, ties go to the lexicographically smaller word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    word_to_index: BTreeMap<String, u32>,
    /// `terms[i]` holds the word with index `i + 1` and its corpus frequency.
    terms: Vec<(String, u64)>,
}

impl Vocabulary {
    pub fn build(corpus: &[TokenList]) -> Result<Self, FeatureError> {
        if corpus.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in corpus {
            for t in doc.iter() {
                *freq.entry(t).or_default() += 1;
            }
        }
        let mut terms: Vec<(String, u64)> =
            freq.into_iter().map(|(w, c)| (String::from(w), c)).collect();
        // BTreeMap iteration is already lexicographic; a stable sort keeps that for ties.
        terms.sort_by_key(|t| core::cmp::Reverse(t.1));
        let word_to_index =
            terms.iter().enumerate().map(|(i, (w, _))| (w.clone(), i as u32 + 1)).collect();
        Ok(Vocabulary { word_to_index, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<u32> {
        self.word_to_index.get(word).copied()
    }

    pub fn word(&self, index: u32) -> Option<&str> {
        let i = (index as usize).checked_sub(1)?;
        self.terms.get(i).map(|(w, _)| w.as_str())
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.index(word).map(|i| self.terms[i as usize - 1].1)
    }

    /// `(index, word, frequency)` in index order.
    pub fn entries(&self) -> impl Iterator<Item = (u32, &str, u64)> {
        self.terms.iter().enumerate().map(|(i, (w, f))| (i as u32 + 1, w.as_str(), *f))
    }

    /// Column of `word` in BoW/TF-IDF rows (its index minus one).
    fn column(&self, word: &str) -> Option<usize> {
        self.index(word).map(|i| i as usize - 1)
    }

    pub fn column_labels(&self) -> Vec<String> {
        self.terms.iter().map(|(w, _)| w.clone()).collect()
    }
}

/// Fixed-length vector of word indices, zero-padded at the tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    pub indices: Vec<u32>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of leading non-padding positions.
    pub fn content_len(&self) -> usize {
        self.indices.iter().take_while(|&&i| i != 0).count()
    }
}

/// Maps in-vocabulary tokens to indices, dropping unknown tokens, keeping the
/// first `maxlen` and padding the tail with zeros.
pub fn encode_sequence(tokens: &TokenList, vocab: &Vocabulary, maxlen: usize) -> TokenSequence {
    let mut indices: Vec<u32> =
        tokens.iter().filter_map(|t| vocab.index(t)).take(maxlen).collect();
    indices.resize(maxlen, 0);
    TokenSequence { indices }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorScheme {
    Bow,
    Tfidf,
    EmbeddingMean,
}

/// A row stored as sorted `(column, value)` pairs with zeros omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn from_dense(dense: &[f64]) -> Self {
        let mut row = SparseRow::default();
        for (j, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                row.indices.push(j as u32);
                row.values.push(v);
            }
        }
        row
    }

    fn from_map(map: BTreeMap<usize, f64>) -> Self {
        let mut row = SparseRow::default();
        for (j, v) in map {
            if v != 0.0 {
                row.indices.push(j as u32);
                row.values.push(v);
            }
        }
        row
    }

    pub fn get(&self, column: usize) -> f64 {
        match self.indices.binary_search(&(column as u32)) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().zip(&self.values).map(|(&j, &v)| (j as usize, v))
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.iter().map(|(j, v)| v * w[j]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn to_dense(&self, width: usize) -> Vec<f64> {
        let mut d = vec![0.0; width];
        for (j, v) in self.iter() {
            d[j] = v;
        }
        d
    }
}

/// Per-paragraph feature rows for the classical models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub scheme: VectorScheme,
    pub column_labels: Vec<String>,
    pub rows: Vec<SparseRow>,
}

impl FeatureMatrix {
    pub fn width(&self) -> usize {
        self.column_labels.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        self.rows[i].to_dense(self.width())
    }
}

fn term_counts(doc: &TokenList, vocab: &Vocabulary) -> BTreeMap<usize, f64> {
    let mut counts = BTreeMap::new();
    for t in doc.iter() {
        if let Some(j) = vocab.column(t) {
            *counts.entry(j).or_insert(0.0) += 1.0;
        }
    }
    counts
}

/// Term-count rows; column `j` counts the word with index `j + 1`.
pub fn bow_vectorize(corpus: &[TokenList], vocab: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        scheme: VectorScheme::Bow,
        column_labels: vocab.column_labels(),
        rows: corpus.iter().map(|d| SparseRow::from_map(term_counts(d, vocab))).collect(),
    }
}

/// Smoothed inverse document frequencies fitted on a training corpus:
/// `idf = ln((1 + N) / (1 + df)) + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdfWeights {
    pub idf: Vec<f64>,
    pub n_documents: usize,
}

impl IdfWeights {
    pub fn fit(corpus: &[TokenList], vocab: &Vocabulary) -> Self {
        let mut df = vec![0u64; vocab.len()];
        for doc in corpus {
            for j in term_counts(doc, vocab).into_keys() {
                df[j] += 1;
            }
        }
        let n = corpus.len() as f64;
        let idf = df.iter().map(|&d| libm::log((1.0 + n) / (1.0 + d as f64)) + 1.0).collect();
        IdfWeights { idf, n_documents: corpus.len() }
    }

    /// `tf * idf` rows, each L2-normalized; rows with no known term stay zero.
    pub fn transform(&self, corpus: &[TokenList], vocab: &Vocabulary) -> FeatureMatrix {
        let rows = corpus
            .iter()
            .map(|doc| {
                let mut w = term_counts(doc, vocab);
                for (j, v) in w.iter_mut() {
                    *v *= self.idf[*j];
                }
                let norm = libm::sqrt(w.values().map(|v| v * v).sum::<f64>());
                if norm > 0.0 {
                    w.values_mut().for_each(|v| *v /= norm);
                }
                SparseRow::from_map(w)
            })
            .collect();
        FeatureMatrix { scheme: VectorScheme::Tfidf, column_labels: vocab.column_labels(), rows }
    }
}

/// Fits IDF on `corpus` and transforms it in one go.
pub fn tfidf_vectorize(corpus: &[TokenList], vocab: &Vocabulary) -> FeatureMatrix {
    IdfWeights::fit(corpus, vocab).transform(corpus, vocab)
}

/// Pretrained word vectors, stored in single precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable { dimension, vectors: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn insert(&mut self, token: String, vector: Vec<f32>) -> Result<(), FeatureError> {
        if vector.len() != self.dimension {
            return Err(FeatureError::WrongDimension {
                line: 0,
                expected: self.dimension,
                found: vector.len(),
            });
        }
        self.vectors.insert(token, vector);
        Ok(())
    }

    /// The table restricted to words of `vocab`.
    pub fn restrict_to(&self, vocab: &Vocabulary) -> EmbeddingTable {
        let vectors = vocab
            .entries()
            .filter_map(|(_, w, _)| self.vectors.get_key_value(w))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        EmbeddingTable { dimension: self.dimension, vectors }
    }
}

/// Parses one `token v1 … vD` line (1-based `line` for error reporting).
pub fn parse_embedding_line(
    text: &str,
    dimension: usize,
    line: usize,
) -> Result<(String, Vec<f32>), FeatureError> {
    let mut parts = text.split_whitespace();
    let token = parts.next().ok_or(FeatureError::MissingToken { line })?;
    let mut v = Vec::with_capacity(dimension);
    for p in parts {
        let x: f32 = p.parse().map_err(|_| FeatureError::BadValue { line, value: p.into() })?;
        v.push(x);
    }
    if v.len() != dimension {
        return Err(FeatureError::WrongDimension { line, expected: dimension, found: v.len() });
    }
    Ok((token.into(), v))
}

/// Mean of the vectors of in-table tokens; the zero vector when none are known.
pub fn embed_mean(tokens: &TokenList, table: &EmbeddingTable) -> Vec<f64> {
    let mut acc = vec![0.0f64; table.dimension];
    let mut n = 0usize;
    for v in tokens.iter().filter_map(|t| table.get(t)) {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += x as f64;
        }
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

pub fn embedding_vectorize(corpus: &[TokenList], table: &EmbeddingTable) -> FeatureMatrix {
    FeatureMatrix {
        scheme: VectorScheme::EmbeddingMean,
        column_labels: (0..table.dimension).map(|i| alloc::format!("dim{i}")).collect(),
        rows: corpus.iter().map(|d| SparseRow::from_dense(&embed_mean(d, table))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn doc(s: &str) -> TokenList {
        TokenList::new(s.split_whitespace().map(str::to_string).collect())
    }

    #[test]
    fn vocabulary_orders_by_frequency() {
        let v = Vocabulary::build(&[doc("secur token jwt"), doc("secur token"), doc("secur")])
            .unwrap();
        assert_eq!(v.index("secur"), Some(1));
        assert_eq!(v.index("token"), Some(2));
        assert_eq!(v.index("jwt"), Some(3));
        assert_eq!(v.word(3), Some("jwt"));
        assert_eq!(v.word(0), None);
        assert_eq!(v.frequency("secur"), Some(3));
    }

    #[test]
    fn vocabulary_single_token_and_ties() {
        let v = Vocabulary::build(&[doc("t")]).unwrap();
        assert_eq!(v.index("t"), Some(1));
        let v = Vocabulary::build(&[doc("zeta alpha")]).unwrap();
        assert_eq!(v.index("alpha"), Some(1));
        assert_eq!(v.index("zeta"), Some(2));
        assert_eq!(Vocabulary::build(&[]), Err(FeatureError::EmptyCorpus));
    }

    fn example_vocab() -> Vocabulary {
        Vocabulary::build(&[doc("secur secur secur"), doc("token token"), doc("jwt")]).unwrap()
    }

    #[test]
    fn encode_examples() {
        let v = example_vocab();
        assert_eq!(encode_sequence(&doc("jwt secur"), &v, 5).indices, [3, 1, 0, 0, 0]);
        assert_eq!(encode_sequence(&doc(""), &v, 5).indices, [0; 5]);
        assert_eq!(encode_sequence(&doc("jwt unknown secur"), &v, 5).indices, [3, 1, 0, 0, 0]);
        let long = TokenList::new((0..101).map(|i| if i % 2 == 0 { "secur" } else { "jwt" }.to_string()).collect());
        let s = encode_sequence(&long, &v, 100);
        assert_eq!(s.len(), 100);
        assert!(s.indices.iter().all(|&i| i != 0));
        assert_eq!(s.indices[99], 3);
    }

    fn two_docs() -> (Vec<TokenList>, Vocabulary) {
        let corpus = vec![doc("secur secur jwt"), doc("jwt token")];
        let v = Vocabulary::build(&corpus).unwrap();
        (corpus, v)
    }

    #[test]
    fn bow_example() {
        let (corpus, v) = two_docs();
        assert_eq!(v.column_labels(), ["jwt", "secur", "token"]);
        let m = bow_vectorize(&corpus, &v);
        assert_eq!(m.dense_row(0), [1.0, 2.0, 0.0]);
        assert_eq!(m.dense_row(1), [1.0, 0.0, 1.0]);
        let e = bow_vectorize(&[doc("")], &v);
        assert_eq!(e.dense_row(0), [0.0; 3]);
    }

    #[test]
    fn tfidf_example() {
        let (corpus, v) = two_docs();
        let idf = IdfWeights::fit(&corpus, &v);
        assert!((idf.idf[0] - 1.0).abs() < 1e-12);
        let want_secur = libm::log(1.5) + 1.0;
        assert!((idf.idf[1] - want_secur).abs() < 1e-12);
        assert!((idf.idf[1] - 1.4055).abs() < 1e-4);
        let m = idf.transform(&corpus, &v);
        let r = m.dense_row(0);
        let raw = [1.0, 2.0 * want_secur];
        let n = libm::sqrt(raw[0] * raw[0] + raw[1] * raw[1]);
        assert!((r[0] - raw[0] / n).abs() < 1e-12);
        assert!((r[1] - raw[1] / n).abs() < 1e-12);
        assert!((r[0] - 0.335).abs() < 1e-3 && (r[1] - 0.942).abs() < 1e-3);
        assert_eq!(r[2], 0.0);
        let z = idf.transform(&[doc("nothing known")], &v);
        assert!(z.rows[0].values.is_empty());
    }

    #[test]
    fn embedding_mean_examples() {
        let mut t = EmbeddingTable::new(2);
        t.insert("a".into(), vec![1.0, 0.0]).unwrap();
        t.insert("b".into(), vec![0.0, 1.0]).unwrap();
        assert_eq!(embed_mean(&doc("a b"), &t), [0.5, 0.5]);
        assert_eq!(embed_mean(&doc("x y"), &t), [0.0, 0.0]);
        assert_eq!(embed_mean(&doc("a"), &t), [1.0, 0.0]);
        assert!(matches!(t.insert("c".into(), vec![1.0]), Err(FeatureError::WrongDimension { .. })));
    }

    #[test]
    fn embedding_line_parsing() {
        let (tok, v) = parse_embedding_line("jwt 0.5 -1 2e-1", 3, 1).unwrap();
        assert_eq!(tok, "jwt");
        assert_eq!(v, [0.5, -1.0, 0.2]);
        assert_eq!(
            parse_embedding_line("jwt 0.5 1", 3, 7),
            Err(FeatureError::WrongDimension { line: 7, expected: 3, found: 2 })
        );
        assert!(matches!(parse_embedding_line("jwt a b c", 3, 2), Err(FeatureError::BadValue { .. })));
    }

    fn corpus_strategy() -> impl Strategy<Value = Vec<TokenList>> {
        let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g"]);
        prop::collection::vec(prop::collection::vec(word, 0..12), 1..8).prop_map(|docs| {
            docs.into_iter().map(|d| TokenList::new(d.into_iter().map(str::to_string).collect())).collect()
        })
    }

    proptest! {
        #[test]
        fn vocabulary_respects_frequency_order(corpus in corpus_strategy()) {
            let v = Vocabulary::build(&corpus).unwrap();
            let entries: Vec<_> = v.entries().collect();
            for w in entries.windows(2) {
                let (i1, t1, f1) = w[0];
                let (i2, t2, f2) = w[1];
                prop_assert_eq!(i1 + 1, i2);
                prop_assert!(f1 > f2 || (f1 == f2 && t1 < t2));
            }
        }

        #[test]
        fn sequences_are_tail_padded(corpus in corpus_strategy(), maxlen in 1usize..15) {
            let v = Vocabulary::build(&corpus).unwrap();
            for d in &corpus {
                let s = encode_sequence(d, &v, maxlen);
                prop_assert_eq!(s.len(), maxlen);
                let k = s.content_len();
                prop_assert!(s.indices[k..].iter().all(|&i| i == 0));
                prop_assert!(s.indices.iter().all(|&i| i as usize <= v.len()));
            }
        }

        #[test]
        fn bow_rows_sum_to_known_tokens(corpus in corpus_strategy()) {
            let train = &corpus[..1];
            let v = Vocabulary::build(train).unwrap();
            let m = bow_vectorize(&corpus, &v);
            for (d, row) in corpus.iter().zip(&m.rows) {
                let known = d.iter().filter(|t| v.index(t).is_some()).count();
                prop_assert_eq!(row.values.iter().sum::<f64>(), known as f64);
            }
        }

        #[test]
        fn tfidf_rows_are_unit_or_zero(corpus in corpus_strategy()) {
            let v = Vocabulary::build(&corpus).unwrap();
            let m = tfidf_vectorize(&corpus, &v);
            for row in &m.rows {
                let n = row.norm_sq();
                prop_assert!(n == 0.0 || (libm::sqrt(n) - 1.0).abs() < 1e-9);
            }
        }
    }
}
