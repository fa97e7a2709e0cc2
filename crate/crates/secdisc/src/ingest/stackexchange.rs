//! Stack Exchange data-dump reader: `Posts.xml` and `Comments.xml` with one
//! `<row .../>` per post or comment, as in the official archive.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use secdisc_core::{RawDocument, Source};
use wildmatch::WildMatch;

use super::{io_err, IngestError, SourceQuery};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Post {
    pub id: u64,
    pub post_type: u8,
    pub parent_id: Option<u64>,
    pub tags: Vec<String>,
    pub body: String,
    pub created_at: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PostComment {
    pub id: u64,
    pub post_id: u64,
    pub text: String,
    pub created_at: Option<String>,
}

const QUESTION: u8 = 1;
const ANSWER: u8 = 2;

/// Attribute maps of every `row` element.
fn rows(xml: &str, path: &str) -> Result<Vec<BTreeMap<String, String>>, IngestError> {
    let malformed = |message: String| IngestError::Malformed { path: path.into(), message };
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    loop {
        let event = reader.read_event().map_err(|e| malformed(format!("at byte {}: {e}", reader.buffer_position())))?;
        match event {
            Event::Empty(e) | Event::Start(e) if e.name().as_ref() == b"row" => {
                let mut attrs = BTreeMap::new();
                for a in e.attributes() {
                    let a = a.map_err(|e| malformed(e.to_string()))?;
                    let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
                    let value = a.unescape_value().map_err(|e| malformed(e.to_string()))?;
                    attrs.insert(key, value.into_owned());
                }
                out.push(attrs);
            }
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

fn number(row: &BTreeMap<String, String>, key: &str, path: &str) -> Result<u64, IngestError> {
    let v = row
        .get(key)
        .ok_or_else(|| IngestError::Malformed { path: path.into(), message: format!("row without {key}") })?;
    v.parse().map_err(|_| IngestError::Malformed { path: path.into(), message: format!("{key}={v:?} is not a number") })
}

/// Both `<a><b>` and `|a|b|` tag encodings.
pub fn parse_tags(raw: &str) -> Vec<String> {
    raw.split(['<', '>', '|']).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

pub fn parse_posts(xml: &str, path: &str) -> Result<Vec<Post>, IngestError> {
    rows(xml, path)?
        .into_iter()
        .map(|r| {
            Ok(Post {
                id: number(&r, "Id", path)?,
                post_type: number(&r, "PostTypeId", path)? as u8,
                parent_id: r.get("ParentId").and_then(|v| v.parse().ok()),
                tags: r.get("Tags").map(|t| parse_tags(t)).unwrap_or_default(),
                body: r.get("Body").cloned().unwrap_or_default(),
                created_at: r.get("CreationDate").cloned(),
            })
        })
        .collect()
}

pub fn parse_comments(xml: &str, path: &str) -> Result<Vec<PostComment>, IngestError> {
    rows(xml, path)?
        .into_iter()
        .map(|r| {
            Ok(PostComment {
                id: number(&r, "Id", path)?,
                post_id: number(&r, "PostId", path)?,
                text: r.get("Text").cloned().unwrap_or_default(),
                created_at: r.get("CreationDate").cloned(),
            })
        })
        .collect()
}

/// A compiled filter list: each group needs one matching tag.
struct TagFilter {
    groups: Vec<Vec<WildMatch>>,
}

impl TagFilter {
    /// Literal (wildcard-free) alternatives must name a tag present in the dump.
    fn new(filters: &[String], known: &BTreeSet<&str>) -> Result<Self, IngestError> {
        let mut groups = Vec::new();
        for f in filters {
            let mut alts = Vec::new();
            for alt in f.split('|').map(|a| a.trim().to_lowercase()).filter(|a| !a.is_empty()) {
                if !alt.contains(['*', '?']) && !known.contains(alt.as_str()) {
                    return Err(IngestError::UnknownTag(alt));
                }
                alts.push(WildMatch::new(&alt));
            }
            groups.push(alts);
        }
        Ok(TagFilter { groups })
    }

    fn admits(&self, tags: &[String]) -> bool {
        self.groups.iter().all(|g| g.iter().any(|w| tags.iter().any(|t| w.matches(t))))
    }
}

fn doc(site: &str, id: String, source: Source, url: String, body: String, created_at: Option<String>) -> RawDocument {
    RawDocument { id, source, project: site.into(), url, placeholder: body.trim().is_empty(), body, created_at }
}

/// For each matching question, in id order: the question, its comments,
/// then each answer followed by the answer's comments.
pub fn select(site: &str, query: &SourceQuery, posts: Vec<Post>, comments: Vec<PostComment>) -> Result<Vec<RawDocument>, IngestError> {
    if query.tag_filters.is_empty() {
        return Err(IngestError::NoTagFilters);
    }
    let known: BTreeSet<&str> = posts.iter().flat_map(|p| p.tags.iter().map(String::as_str)).collect();
    let filter = TagFilter::new(&query.tag_filters, &known)?;
    let mut by_post: BTreeMap<u64, Vec<PostComment>> = BTreeMap::new();
    for c in comments {
        by_post.entry(c.post_id).or_default().push(c);
    }
    by_post.values_mut().for_each(|cs| cs.sort_by_key(|c| c.id));
    let mut answers: BTreeMap<u64, Vec<&Post>> = BTreeMap::new();
    for p in posts.iter().filter(|p| p.post_type == ANSWER) {
        if let Some(parent) = p.parent_id {
            answers.entry(parent).or_default().push(p);
        }
    }
    answers.values_mut().for_each(|a| a.sort_by_key(|p| p.id));
    let mut questions: Vec<&Post> =
        posts.iter().filter(|p| p.post_type == QUESTION && filter.admits(&p.tags)).collect();
    questions.sort_by_key(|p| p.id);
    let mut out = Vec::new();
    let push_comments = |out: &mut Vec<RawDocument>, post: u64| {
        for c in by_post.get(&post).into_iter().flatten() {
            out.push(doc(
                site,
                format!("{site}:comment-{}", c.id),
                Source::SoComment,
                format!("https://{site}/posts/comments/{}", c.id),
                c.text.clone(),
                c.created_at.clone(),
            ));
        }
    };
    for q in questions {
        out.push(doc(
            site,
            format!("{site}:post-{}", q.id),
            Source::SoQuestion,
            format!("https://{site}/q/{}", q.id),
            q.body.clone(),
            q.created_at.clone(),
        ));
        push_comments(&mut out, q.id);
        for a in answers.get(&q.id).into_iter().flatten() {
            out.push(doc(
                site,
                format!("{site}:post-{}", a.id),
                Source::SoAnswer,
                format!("https://{site}/a/{}", a.id),
                a.body.clone(),
                a.created_at.clone(),
            ));
            push_comments(&mut out, a.id);
        }
    }
    Ok(out)
}

/// Reads `Posts.xml` and, when present, `Comments.xml` from a dump directory.
/// The site name defaults to the directory name.
pub fn fetch_dump(dir: &Path, query: &SourceQuery) -> Result<Vec<RawDocument>, IngestError> {
    let posts_path = dir.join("Posts.xml");
    let text = fs::read_to_string(&posts_path).map_err(io_err(&posts_path))?;
    let posts = parse_posts(&text, &posts_path.display().to_string())?;
    let comments_path = dir.join("Comments.xml");
    let comments = if comments_path.exists() {
        let text = fs::read_to_string(&comments_path).map_err(io_err(&comments_path))?;
        parse_comments(&text, &comments_path.display().to_string())?
    } else {
        Vec::new()
    };
    let site = if query.repo_or_site.is_empty() {
        dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    } else {
        query.repo_or_site.clone()
    };
    select(&site, query, posts, comments)
}
