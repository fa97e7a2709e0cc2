//! Loading stop-word lists, contraction tables, keyword lexicons and
//! pretrained word vectors from disk.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use secdisc_core::baseline::{parse_aliases, BaselineError, DEFAULT_ALIASES, DEFAULT_LEXICON};
use secdisc_core::features::{parse_embedding_line, FeatureError};
use secdisc_core::preprocess::{
    parse_contractions, parse_stopwords, porter_stem, ResourceError, DEFAULT_CONTRACTIONS, DEFAULT_STOPWORDS,
};
use secdisc_core::{EmbeddingTable, KeywordLexicon, PreprocessConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResourceFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Resource { path: String, source: ResourceError },
    #[error("{path}: {source}")]
    Baseline { path: String, source: BaselineError },
    #[error("{path}: {source}")]
    Embedding { path: String, source: FeatureError },
    #[error("{path}: no word vectors found")]
    NoVectors { path: String },
}

fn read_or(path: Option<&Path>, default: &str) -> Result<(String, String), ResourceFileError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|source| ResourceFileError::Io { path: p.display().to_string(), source })?;
            Ok((text, p.display().to_string()))
        }
        None => Ok((default.to_string(), "<bundled>".into())),
    }
}

/// The preprocessing configuration, with bundled lists where no file is given.
pub fn preprocess_config(
    stopwords: Option<&Path>,
    contractions: Option<&Path>,
) -> Result<PreprocessConfig, ResourceFileError> {
    let (sw, sw_path) = read_or(stopwords, DEFAULT_STOPWORDS)?;
    let (ct, ct_path) = read_or(contractions, DEFAULT_CONTRACTIONS)?;
    let contractions = parse_contractions(&ct)
        .map_err(|source| ResourceFileError::Resource { path: ct_path, source })?;
    PreprocessConfig::new(parse_stopwords(&sw), contractions)
        .map_err(|source| ResourceFileError::Resource { path: sw_path, source })
}

pub fn lexicon(
    lexicon: Option<&Path>,
    aliases: Option<&Path>,
    cfg: &PreprocessConfig,
) -> Result<KeywordLexicon, ResourceFileError> {
    let (lex, lex_path) = read_or(lexicon, DEFAULT_LEXICON)?;
    let (al, al_path) = read_or(aliases, DEFAULT_ALIASES)?;
    let aliases = parse_aliases(&al).map_err(|source| ResourceFileError::Baseline { path: al_path, source })?;
    KeywordLexicon::build(&lex, &aliases, cfg).map_err(|source| ResourceFileError::Baseline { path: lex_path, source })
}

/// Reads a GloVe-style text file (`word v1 .. vD` per line; a leading
/// `count dimension` header is skipped). The dimension is taken from the
/// first vector. With `stem_keys` every word is keyed by its Porter stem so
/// it matches preprocessed tokens; the first word of each stem wins, which
/// for frequency-ordered files is the most frequent surface form. Only keys
/// in `keep` are retained when it is given.
pub fn load_embeddings(
    path: &Path,
    keep: Option<&BTreeSet<String>>,
    stem_keys: bool,
) -> Result<EmbeddingTable, ResourceFileError> {
    let p = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| ResourceFileError::Io { path: p.clone(), source })?;
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| ResourceFileError::Io { path: p.clone(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        if table.is_none() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
                continue;
            }
            table = Some(EmbeddingTable::new(fields.len() - 1));
        }
        let t = table.as_mut().expect("table initialized above");
        let (word, vector) = parse_embedding_line(&line, t.dimension(), i + 1)
            .map_err(|source| ResourceFileError::Embedding { path: p.clone(), source })?;
        let key = if stem_keys { porter_stem(&word.to_lowercase()) } else { word };
        if t.get(&key).is_some() || keep.is_some_and(|k| !k.contains(&key)) {
            continue;
        }
        t.insert(key, vector).map_err(|source| ResourceFileError::Embedding { path: p.clone(), source })?;
    }
    table.filter(|t| !t.is_empty()).ok_or(ResourceFileError::NoVectors { path: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults_load() {
        let cfg = preprocess_config(None, None).unwrap();
        assert_eq!(cfg, PreprocessConfig::default());
        assert!(lexicon(None, None, &cfg).unwrap().contains("jwt"));
    }

    #[test]
    fn custom_files_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let sw = dir.path().join("sw.txt");
        fs::write(&sw, "the\na\n").unwrap();
        let cfg = preprocess_config(Some(&sw), None).unwrap();
        assert_eq!(cfg.stopwords.len(), 2);
        let bad = dir.path().join("c.tsv");
        fs::write(&bad, "no tab here\n").unwrap();
        assert!(matches!(preprocess_config(None, Some(&bad)), Err(ResourceFileError::Resource { .. })));
        assert!(matches!(preprocess_config(Some(&dir.path().join("x")), None), Err(ResourceFileError::Io { .. })));
    }

    #[test]
    fn embeddings_are_stemmed_filtered_and_first_wins() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vec.txt");
        fs::write(&p, "3 2\nsecurity 1 2\nsecure 9 9\ndocker 0.5 -1\nthe 0 0\n").unwrap();
        let t = load_embeddings(&p, None, true).unwrap();
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.get("secur"), Some(&[1.0f32, 2.0][..]));
        assert_eq!(t.len(), 3);
        let keep: BTreeSet<String> = ["docker".to_string()].into();
        let t = load_embeddings(&p, Some(&keep), true).unwrap();
        assert_eq!(t.len(), 1);
        let raw = load_embeddings(&p, None, false).unwrap();
        assert!(raw.get("secure").is_some());
        fs::write(&p, "a 1 2\nb 1\n").unwrap();
        assert!(matches!(load_embeddings(&p, None, true), Err(ResourceFileError::Embedding { .. })));
        fs::write(&p, "\n").unwrap();
        assert!(matches!(load_embeddings(&p, None, true), Err(ResourceFileError::NoVectors { .. })));
    }
}
