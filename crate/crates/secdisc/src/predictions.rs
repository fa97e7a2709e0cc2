//! Prediction files: one `paragraph_id,label[,score]` line per paragraph.
//! Lines starting with `#` carry run metadata and are ignored on read.

use std::collections::BTreeMap;

use secdisc_core::{Label, Predictions};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PredictionFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate paragraph id {id}")]
    Duplicate { line: usize, id: String },
    #[error("paragraph id {0:?} contains a comma")]
    CommaInId(String),
    #[error("{ids} ids but {predictions} predictions")]
    LengthMismatch { ids: usize, predictions: usize },
}

pub type PredictionMap = BTreeMap<String, (Label, Option<f64>)>;

pub fn format_predictions(
    header: &[String],
    ids: &[&str],
    pred: &Predictions,
) -> Result<String, PredictionFileError> {
    if ids.len() != pred.len() {
        return Err(PredictionFileError::LengthMismatch { ids: ids.len(), predictions: pred.len() });
    }
    let mut out = String::new();
    for h in header {
        out.push_str(&format!("# {h}\n"));
    }
    for ((id, label), score) in ids.iter().zip(&pred.labels).zip(&pred.scores) {
        if id.contains(',') {
            return Err(PredictionFileError::CommaInId(id.to_string()));
        }
        out.push_str(&format!("{id},{},{score:.6}\n", label.as_u8()));
    }
    Ok(out)
}

pub fn parse_predictions(text: &str) -> Result<PredictionMap, PredictionFileError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| PredictionFileError::Malformed { line: line_no, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) || fields[0].is_empty() {
            return Err(bad("expected paragraph_id,label[,score]".into()));
        }
        let label = Label::parse(fields[1]).map_err(|e| bad(e.to_string()))?;
        let score = match fields.get(2) {
            Some(s) => {
                let v: f64 = s.parse().map_err(|_| bad(format!("invalid score {s:?}")))?;
                if !v.is_finite() {
                    return Err(bad(format!("invalid score {s:?}")));
                }
                Some(v)
            }
            None => None,
        };
        if map.insert(fields[0].to_string(), (label, score)).is_some() {
            return Err(PredictionFileError::Duplicate { line: line_no, id: fields[0].into() });
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_metadata() {
        let pred = Predictions::from_scores(vec![0.9, 0.1, 0.5]);
        let text = format_predictions(&["seed: 1".into()], &["a", "b", "c"], &pred).unwrap();
        assert_eq!(text, "# seed: 1\na,1,0.900000\nb,0,0.100000\nc,0,0.500000\n");
        let map = parse_predictions(&text).unwrap();
        assert_eq!(map["a"], (Label::Security, Some(0.9)));
        assert_eq!(map.len(), 3);
    }

    #[test]
    fn labels_without_scores_and_errors() {
        let map = parse_predictions("x,1\ny,0\n").unwrap();
        assert_eq!(map["y"], (Label::NonSecurity, None));
        assert!(matches!(parse_predictions("x,2\n"), Err(PredictionFileError::Malformed { line: 1, .. })));
        assert!(matches!(parse_predictions("x,1\nx,0\n"), Err(PredictionFileError::Duplicate { line: 2, .. })));
        assert!(matches!(parse_predictions("x,1,nan\n"), Err(PredictionFileError::Malformed { .. })));
        assert!(matches!(parse_predictions("x\n"), Err(PredictionFileError::Malformed { .. })));
        let p = Predictions::from_scores(vec![0.2]);
        assert!(matches!(format_predictions(&[], &["a,b"], &p), Err(PredictionFileError::CommaInId(_))));
    }
}
