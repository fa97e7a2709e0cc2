//! The line-delimited dataset file.
//!
//! Layout: optional `# dataset: <name>` and `# provenance: <text>` lines, a
//! header line naming the nine fields, then one tab-separated record per line:
//!
//! ```text
//! paragraph_id  document_ref  source  project  url  position  label  security_words  text
//! ```
//!
//! Every field is escaped: `\` becomes `\\`, tab `\t`, line feed `\n` and
//! carriage return `\r`. Security words are joined with `;`, and a literal
//! `;` inside a word is written `\;`. An empty label field marks an
//! unlabeled paragraph. Any other backslash sequence is an error.

use std::fs;
use std::path::Path;

use secdisc_core::corpus::CorpusError;
use secdisc_core::{Dataset, Label, LabeledParagraph, Paragraph, Source};
use thiserror::Error;

use crate::atomic_write;

pub const HEADER: &str =
    "paragraph_id\tdocument_ref\tsource\tproject\turl\tposition\tlabel\tsecurity_words\ttext";

const FIELDS: usize = 9;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Record { line: usize, source: CorpusError },
    #[error("line {line}: paragraph {id} has no label")]
    Unlabeled { line: usize, id: String },
    #[error("missing header line")]
    MissingHeader,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// One record of a dataset file, labeled or not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub paragraph: Paragraph,
    pub label: Option<Label>,
    pub security_words: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParagraphFile {
    pub name: String,
    pub provenance: String,
    pub records: Vec<Record>,
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(';') => out.push(';'),
            Some(o) => return Err(format!("unknown escape \\{o}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

fn join_words(words: &[String]) -> String {
    let parts: Vec<String> = words.iter().map(|w| escape(w).replace(';', "\\;")).collect();
    parts.join(";")
}

/// Splits on `;` not preceded by an escaping backslash.
fn split_words(field: &str) -> Result<Vec<String>, String> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                current.push(c);
                if let Some(n) = chars.next() {
                    current.push(n);
                }
            }
            ';' => parts.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    parts.push(current);
    parts.iter().map(|p| unescape(p)).collect()
}

pub fn format_record(r: &Record) -> String {
    let p = &r.paragraph;
    let label = r.label.map(|l| l.as_u8().to_string()).unwrap_or_default();
    [
        escape(&p.paragraph_id),
        escape(&p.document_ref),
        p.source.as_str().to_string(),
        escape(&p.project),
        escape(&p.url),
        p.position.to_string(),
        label,
        join_words(&r.security_words),
        escape(&p.text),
    ]
    .join("\t")
}

fn parse_record(line: &str, n: usize) -> Result<Record, FormatError> {
    let bad = |message: String| FormatError::Malformed { line: n, message };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != FIELDS {
        return Err(bad(format!("expected {FIELDS} fields, found {}", fields.len())));
    }
    let text_field = |i: usize| unescape(fields[i]).map_err(&bad);
    let source = Source::parse(fields[2]).map_err(|source| FormatError::Record { line: n, source })?;
    let position =
        fields[5].parse().map_err(|_| bad(format!("invalid position {:?}", fields[5])))?;
    let label = match fields[6] {
        "" => None,
        s => Some(Label::parse(s).map_err(|source| FormatError::Record { line: n, source })?),
    };
    let paragraph = Paragraph {
        paragraph_id: text_field(0)?,
        document_ref: text_field(1)?,
        source,
        project: text_field(3)?,
        url: text_field(4)?,
        position,
        text: text_field(8)?,
    };
    if paragraph.paragraph_id.is_empty() {
        return Err(bad("empty paragraph id".into()));
    }
    let security_words = split_words(fields[7]).map_err(bad)?;
    Ok(Record { paragraph, label, security_words })
}

pub fn parse_paragraph_file(text: &str) -> Result<ParagraphFile, FormatError> {
    let mut file = ParagraphFile::default();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if !saw_header {
            if let Some(rest) = line.strip_prefix("# dataset: ") {
                file.name = unescape(rest).map_err(|message| FormatError::Malformed { line: n, message })?;
            } else if let Some(rest) = line.strip_prefix("# provenance: ") {
                file.provenance =
                    unescape(rest).map_err(|message| FormatError::Malformed { line: n, message })?;
            } else if line == HEADER {
                saw_header = true;
            } else {
                return Err(FormatError::Malformed { line: n, message: "expected header".into() });
            }
            continue;
        }
        if line.is_empty() {
            return Err(FormatError::Malformed { line: n, message: "blank line".into() });
        }
        file.records.push(parse_record(line, n)?);
    }
    if !saw_header {
        return Err(FormatError::MissingHeader);
    }
    Ok(file)
}

pub fn format_paragraph_file(file: &ParagraphFile) -> String {
    let mut out = String::new();
    if !file.name.is_empty() {
        out.push_str(&format!("# dataset: {}\n", escape(&file.name)));
    }
    if !file.provenance.is_empty() {
        out.push_str(&format!("# provenance: {}\n", escape(&file.provenance)));
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in &file.records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn load_paragraph_file(path: &Path) -> Result<ParagraphFile, FormatError> {
    parse_paragraph_file(&read(path)?)
}

pub fn save_paragraph_file(file: &ParagraphFile, path: &Path) -> Result<(), FormatError> {
    atomic_write(path, format_paragraph_file(file).as_bytes())
        .map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// Parses a labeled dataset; every record must carry a label.
pub fn parse_dataset(text: &str) -> Result<Dataset, FormatError> {
    let file = parse_paragraph_file(text)?;
    let mut records = Vec::with_capacity(file.records.len());
    let mut seen = std::collections::BTreeMap::new();
    for (i, r) in file.records.into_iter().enumerate() {
        let line = line_of(text, i);
        let label = r.label.ok_or_else(|| FormatError::Unlabeled { line, id: r.paragraph.paragraph_id.clone() })?;
        if let Some(first) = seen.insert(r.paragraph.paragraph_id.clone(), line) {
            return Err(FormatError::Malformed {
                line,
                message: format!("duplicate paragraph id {} (first on line {first})", r.paragraph.paragraph_id),
            });
        }
        let lp = LabeledParagraph::new(r.paragraph, label, r.security_words)
            .map_err(|source| FormatError::Record { line, source })?;
        records.push(lp);
    }
    Ok(Dataset::new(file.name, file.provenance, records)?)
}

/// 1-based file line of the `i`-th record.
fn line_of(text: &str, i: usize) -> usize {
    let preamble = text.lines().position(|l| l == HEADER).unwrap_or(0) + 1;
    preamble + i + 1
}

pub fn load_dataset(path: &Path) -> Result<Dataset, FormatError> {
    parse_dataset(&read(path)?)
}

pub fn dataset_to_file(ds: &Dataset) -> ParagraphFile {
    ParagraphFile {
        name: ds.name.clone(),
        provenance: ds.provenance.clone(),
        records: ds
            .records()
            .iter()
            .map(|r| Record {
                paragraph: r.paragraph.clone(),
                label: Some(r.label),
                security_words: r.security_words.clone(),
            })
            .collect(),
    }
}

pub fn format_dataset(ds: &Dataset) -> String {
    format_paragraph_file(&dataset_to_file(ds))
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<(), FormatError> {
    save_paragraph_file(&dataset_to_file(ds), path)
}

/// Unlabeled records for the given paragraphs.
pub fn unlabeled(name: &str, provenance: &str, paragraphs: Vec<Paragraph>) -> ParagraphFile {
    ParagraphFile {
        name: name.into(),
        provenance: provenance.into(),
        records: paragraphs
            .into_iter()
            .map(|paragraph| Record { paragraph, label: None, security_words: Vec::new() })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, label: Label, text: &str, words: &[&str]) -> LabeledParagraph {
        LabeledParagraph::new(
            Paragraph {
                paragraph_id: id.into(),
                document_ref: format!("doc-{id}"),
                source: Source::GithubIssue,
                project: "acme/shop".into(),
                url: format!("https://github.com/acme/shop/issues/{id}"),
                position: 0,
                text: text.into(),
            },
            label,
            words.iter().map(|w| w.to_string()).collect(),
        )
        .unwrap()
    }

    fn three() -> Dataset {
        Dataset::new(
            "toy",
            "hand written",
            vec![
                record("1", Label::Security, "Use OAuth2 tokens.", &["oauth2", "token"]),
                record("2", Label::NonSecurity, "Bump the version.", &[]),
                record("3", Label::Security, "Rotate\tkeys\nweekly \\ always", &["key;rotation"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn three_records_round_trip_in_order() {
        let ds = three();
        let text = format_dataset(&ds);
        let back = parse_dataset(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(format_dataset(&back), text);
        let ids: Vec<&str> = back.records().iter().map(|r| r.id()).collect();
        assert_eq!(ids, ["1", "2", "3"]);
    }

    #[test]
    fn empty_dataset_has_no_records() {
        let ds = Dataset::new("", "", vec![]).unwrap();
        let text = format_dataset(&ds);
        assert_eq!(text, format!("{HEADER}\n"));
        assert!(parse_dataset(&text).unwrap().is_empty());
    }

    #[test]
    fn file_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        save_dataset(&three(), &path).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), three());
        assert!(save_dataset(&three(), &dir.path().join("missing/dir/d.tsv")).is_err());
    }

    #[test]
    fn bad_label_names_its_line() {
        let text = format_dataset(&three()).replace("\t0\t\tBump", "\t2\t\tBump");
        let err = parse_dataset(&text).unwrap_err();
        assert!(matches!(err, FormatError::Record { line: 5, .. }), "{err}");
        assert!(err.to_string().starts_with("line 5:"));
    }

    #[test]
    fn duplicate_ids_and_unknown_sources_are_errors() {
        let text = format_dataset(&three());
        let dup = format!("{text}{}\n", text.lines().nth(3).unwrap());
        assert!(parse_dataset(&dup).unwrap_err().to_string().contains("duplicate paragraph id 1"));
        let bad = text.replace("github_issue", "mailing_list");
        assert!(matches!(
            parse_dataset(&bad),
            Err(FormatError::Record { source: CorpusError::UnknownSource(_), .. })
        ));
        let short = format!("{HEADER}\na\tb\n");
        assert!(matches!(parse_dataset(&short), Err(FormatError::Malformed { line: 2, .. })));
    }

    #[test]
    fn unlabeled_records_load_as_files_but_not_datasets() {
        let p = three().records()[0].paragraph.clone();
        let file = unlabeled("u", "", vec![p]);
        let text = format_paragraph_file(&file);
        assert_eq!(parse_paragraph_file(&text).unwrap(), file);
        assert!(matches!(parse_dataset(&text), Err(FormatError::Unlabeled { line: 3, .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_text_round_trips(
            text in "[a-zA-Z0-9 \\\\\t\n\r;é😀]{1,60}",
            words in proptest::collection::vec("[a-z;\\\\ ]{1,8}", 0..4),
        ) {
            prop_assume!(!text.trim().is_empty());
            let label = if words.is_empty() { Label::NonSecurity } else { Label::Security };
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            let ds = Dataset::new("p", "q\nr", vec![record("x", label, &text, &words)]).unwrap();
            let encoded = format_dataset(&ds);
            prop_assert_eq!(encoded.lines().count(), 4);
            prop_assert_eq!(parse_dataset(&encoded).unwrap(), ds);
        }
    }
}
