//! Paragraph segmentation and seeded sampling.

use rand::seq::index;
use secdisc_core::{seed, Paragraph, RawDocument, Source};

use super::IngestError;

/// Stack Exchange bodies are HTML; anything else is HTML only when it
/// contains a `<p>` element.
fn is_html(doc: &RawDocument) -> bool {
    match doc.source {
        Source::SoQuestion | Source::SoAnswer | Source::StackexchangePost => true,
        Source::GithubIssue | Source::SoComment => has_p_tag(&doc.body.to_ascii_lowercase()),
    }
}

fn has_p_tag(lower: &str) -> bool {
    lower.contains("<p>") || lower.contains("<p ")
}

/// Tag-free, entity-decoded text of an HTML fragment.
pub fn html_text(fragment: &str) -> String {
    let mut out = String::with_capacity(fragment.len());
    let mut in_tag = false;
    for c in fragment.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                out.push(' ');
            }
            c if !in_tag => out.push(c),
            _ => {}
        }
    }
    let decoded = html_escape::decode_html_entities(&out);
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Contents of each `<p>` element, in order.
fn html_paragraphs(body: &str) -> Vec<String> {
    let lower = body.to_ascii_lowercase();
    let mut out = Vec::new();
    let mut at = 0;
    while let Some(i) = lower[at..].find("<p") {
        let start = at + i;
        let after = &lower[start + 2..];
        if !after.starts_with('>') && !after.starts_with(char::is_whitespace) {
            at = start + 2;
            continue;
        }
        let Some(gt) = lower[start..].find('>') else { break };
        let content = start + gt + 1;
        let end = lower[content..].find("</p>").map(|e| content + e);
        let next = lower[content..].find("<p").map(|e| content + e);
        let stop = match (end, next) {
            (Some(e), Some(n)) => e.min(n),
            (Some(e), None) => e,
            (None, Some(n)) => n,
            (None, None) => body.len(),
        };
        out.push(html_text(&body[content..stop]));
        at = if Some(stop) == end { stop + 4 } else { stop };
    }
    out
}

/// Blocks separated by one or more blank lines, each trimmed.
fn blank_line_blocks(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in body.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push(current.join("\n").trim().to_string());
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n").trim().to_string());
    }
    out
}

/// Splits a document whose code has already been stripped. Empty segments
/// are dropped and positions run from 0 without gaps.
pub fn split_paragraphs(doc: &RawDocument) -> Vec<Paragraph> {
    let segments = if is_html(doc) { html_paragraphs(&doc.body) } else { blank_line_blocks(&doc.body) };
    segments
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(k, text)| {
            let position = k as u32;
            Paragraph {
                paragraph_id: Paragraph::make_id(&doc.id, position),
                document_ref: doc.id.clone(),
                source: doc.source,
                project: doc.project.clone(),
                url: doc.url.clone(),
                position,
                text,
            }
        })
        .collect()
}

/// Uniform sample of `n` paragraphs without replacement, kept in input order.
pub fn sample_paragraphs(paragraphs: &[Paragraph], n: usize, seed_value: u64) -> Result<Vec<Paragraph>, IngestError> {
    if n > paragraphs.len() {
        return Err(IngestError::SampleTooLarge { n, population: paragraphs.len() });
    }
    let mut rng = seed::rng_for(seed_value, 0x005A_3F1E);
    let mut picked = index::sample(&mut rng, paragraphs.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| paragraphs[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(source: Source, body: &str) -> RawDocument {
        RawDocument {
            id: "acme/shop#issue-1".into(),
            source,
            project: "acme/shop".into(),
            url: "https://github.com/acme/shop/issues/1".into(),
            body: body.into(),
            created_at: None,
            placeholder: body.is_empty(),
        }
    }

    fn texts(ps: &[Paragraph]) -> Vec<&str> {
        ps.iter().map(|p| p.text.as_str()).collect()
    }

    #[test]
    fn html_splits_on_p_elements() {
        let ps = split_paragraphs(&doc(Source::SoQuestion, "<p>x</p><p>y</p>"));
        assert_eq!(texts(&ps), ["x", "y"]);
        assert_eq!(ps[1].paragraph_id, "acme/shop#issue-1#1");
        let ps = split_paragraphs(&doc(
            Source::SoAnswer,
            "<p class=\"a\">Use <em>TLS</em> &amp; mTLS</p>\n<ul><li>skip</li></ul><p></p><p>last",
        ));
        assert_eq!(texts(&ps), ["Use TLS & mTLS", "last"]);
        assert_eq!(ps[1].position, 1);
    }

    #[test]
    fn markdown_splits_on_blank_lines() {
        let ps = split_paragraphs(&doc(Source::GithubIssue, "A\n\nB\n\n\nC"));
        assert_eq!(texts(&ps), ["A", "B", "C"]);
        assert_eq!(ps.iter().map(|p| p.position).collect::<Vec<_>>(), [0, 1, 2]);
        let ps = split_paragraphs(&doc(Source::GithubIssue, "one\ntwo\n \t\nthree\n"));
        assert_eq!(texts(&ps), ["one\ntwo", "three"]);
    }

    #[test]
    fn empty_body_gives_nothing() {
        assert!(split_paragraphs(&doc(Source::GithubIssue, "")).is_empty());
        assert!(split_paragraphs(&doc(Source::SoQuestion, "")).is_empty());
    }

    #[test]
    fn github_body_with_p_tags_is_html() {
        let ps = split_paragraphs(&doc(Source::GithubIssue, "<p>a</p>\n\n<p>b</p>"));
        assert_eq!(texts(&ps), ["a", "b"]);
    }

    fn population(n: usize) -> Vec<Paragraph> {
        (0..n)
            .map(|i| split_paragraphs(&doc(Source::GithubIssue, &format!("p{i}"))).remove(0))
            .map(|mut p| {
                p.paragraph_id = format!("{}-{}", p.paragraph_id, p.text);
                p
            })
            .collect()
    }

    #[test]
    fn sampling_edges() {
        let pop = population(12);
        assert_eq!(sample_paragraphs(&pop, 12, 3).unwrap(), pop);
        assert!(sample_paragraphs(&pop, 0, 3).unwrap().is_empty());
        assert!(matches!(
            sample_paragraphs(&pop, 13, 3),
            Err(IngestError::SampleTooLarge { n: 13, population: 12 })
        ));
    }

    proptest! {
        #[test]
        fn sampling_is_deterministic_and_drawn_from_input(n in 0usize..40, seed_value in any::<u64>()) {
            let pop = population(40);
            let a = sample_paragraphs(&pop, n, seed_value).unwrap();
            prop_assert_eq!(&a, &sample_paragraphs(&pop, n, seed_value).unwrap());
            prop_assert_eq!(a.len(), n);
            let positions: Vec<usize> =
                a.iter().map(|p| pop.iter().position(|q| q == p).unwrap()).collect();
            prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn positions_are_consecutive(blocks in proptest::collection::vec("[a-z ]{0,8}", 0..10)) {
            let body = blocks.join("\n\n\n");
            let ps = split_paragraphs(&doc(Source::GithubIssue, &body));
            prop_assert_eq!(ps.len(), blocks.iter().filter(|b| !b.trim().is_empty()).count());
            for (k, p) in ps.iter().enumerate() {
                prop_assert_eq!(p.position as usize, k);
                prop_assert!(!p.text.trim().is_empty());
            }
        }
    }
}
