//! GitHub issues and issue comments, from the REST v3 API or from a local
//! dump laid out as `issues/<number>.json` and `comments/<id>.json`, each
//! holding one payload exactly as the API returns it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use secdisc_core::{RawDocument, Source};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{io_err, Credentials, IngestError, IssueState, SourceQuery};

pub const API_BASE: &str = "https://api.github.com";

#[derive(Clone, Debug, Deserialize)]
pub struct Issue {
    pub number: u64,
    pub body: Option<String>,
    pub state: String,
    #[serde(default)]
    pub html_url: String,
    pub created_at: Option<String>,
    /// Present when the "issue" is a pull request.
    pub pull_request: Option<serde_json::Value>,
    pub repository_url: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Comment {
    pub id: u64,
    pub body: Option<String>,
    #[serde(default)]
    pub html_url: String,
    pub created_at: Option<String>,
    pub issue_url: String,
}

impl Comment {
    fn issue_number(&self) -> Option<u64> {
        self.issue_url.rsplit('/').next()?.parse().ok()
    }
}

fn document(id: String, project: &str, url: String, body: Option<String>, created_at: Option<String>) -> RawDocument {
    let body = body.unwrap_or_default();
    RawDocument {
        id,
        source: Source::GithubIssue,
        project: project.into(),
        url,
        placeholder: body.trim().is_empty(),
        body,
        created_at,
    }
}

/// One document per issue body and per comment, ordered by issue number with
/// each issue's comments following it by id. Pull requests are skipped.
pub fn to_documents(repo: &str, state: IssueState, issues: Vec<Issue>, comments: Vec<Comment>) -> Vec<RawDocument> {
    let mut by_issue: BTreeMap<u64, (Issue, Vec<Comment>)> = issues
        .into_iter()
        .filter(|i| i.pull_request.is_none() && state.admits(&i.state))
        .map(|i| (i.number, (i, Vec::new())))
        .collect();
    for c in comments {
        if let Some(entry) = c.issue_number().and_then(|n| by_issue.get_mut(&n)) {
            entry.1.push(c);
        }
    }
    let mut out = Vec::new();
    for (number, (issue, mut cs)) in by_issue {
        out.push(document(format!("{repo}#issue-{number}"), repo, issue.html_url, issue.body, issue.created_at));
        cs.sort_by_key(|c| c.id);
        for c in cs {
            out.push(document(format!("{repo}#comment-{}", c.id), repo, c.html_url, c.body, c.created_at));
        }
    }
    out
}

fn read_json_dir<T: DeserializeOwned>(dir: &Path) -> Result<Vec<T>, IngestError> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text)
                .map_err(|e| IngestError::Malformed { path: p.display().to_string(), message: e.to_string() })
        })
        .collect()
}

/// `owner/name` from an issue's `repository_url`.
fn repo_of(issue: &Issue) -> Option<String> {
    let url = issue.repository_url.as_deref()?;
    let mut parts = url.rsplit('/');
    let name = parts.next()?;
    let owner = parts.next()?;
    Some(format!("{owner}/{name}"))
}

/// Reads a dump. When the query names no repository it is taken from the
/// payloads, falling back to the directory name.
pub fn fetch_dump(dir: &Path, query: &SourceQuery) -> Result<Vec<RawDocument>, IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::Io {
            path: dir.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "dump directory not found"),
        });
    }
    let issues: Vec<Issue> = read_json_dir(&dir.join("issues"))?;
    let comments: Vec<Comment> = read_json_dir(&dir.join("comments"))?;
    let repo = if query.repo_or_site.is_empty() {
        issues.iter().find_map(repo_of).unwrap_or_else(|| {
            let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            format!("local/{name}")
        })
    } else {
        query.validate()?;
        query.repo_or_site.clone()
    };
    Ok(to_documents(&repo, query.issue_state, issues, comments))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    /// Header names in lower case.
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }
}

pub trait Transport {
    fn get(&self, url: &str, headers: &[(&str, String)]) -> Result<HttpResponse, IngestError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl Default for UreqTransport {
    fn default() -> Self {
        let config = ureq::Agent::config_builder().http_status_as_error(false).build();
        UreqTransport { agent: config.into() }
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, headers: &[(&str, String)]) -> Result<HttpResponse, IngestError> {
        let mut req = self.agent.get(url);
        for (k, v) in headers {
            req = req.header(*k, v.as_str());
        }
        let mut resp = req.call().map_err(|e| IngestError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .map(|(k, v)| (k.as_str().to_ascii_lowercase(), v.to_str().unwrap_or("").to_string()))
            .collect();
        let body = resp.body_mut().read_to_string().map_err(|e| IngestError::Transport(e.to_string()))?;
        Ok(HttpResponse { status, headers, body })
    }
}

/// The `rel="next"` target of a `Link` header.
pub fn next_link(link: &str) -> Option<String> {
    link.split(',').find_map(|part| {
        let (url, params) = part.split_once(';')?;
        params
            .split(';')
            .any(|p| p.trim() == "rel=\"next\"")
            .then(|| url.trim().trim_start_matches('<').trim_end_matches('>').to_string())
    })
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn status_error(resp: &HttpResponse, url: &str, repo: &str) -> IngestError {
    let exhausted = resp.header("x-ratelimit-remaining") == Some("0");
    match resp.status {
        401 => IngestError::AuthFailed,
        404 => IngestError::RepoNotFound(repo.into()),
        403 | 429 if exhausted || resp.header("retry-after").is_some() => {
            let retry_after_secs = match resp.header("retry-after").and_then(|v| v.parse().ok()) {
                Some(s) => s,
                None => resp
                    .header("x-ratelimit-reset")
                    .and_then(|v| v.parse::<u64>().ok())
                    .map(|reset| reset.saturating_sub(now_secs()))
                    .unwrap_or(60),
            };
            IngestError::RateLimited { retry_after_secs }
        }
        status => IngestError::Http { status, url: url.into() },
    }
}

pub struct GithubClient<T: Transport> {
    pub transport: T,
    pub base: String,
    pub credentials: Credentials,
}

impl<T: Transport> GithubClient<T> {
    pub fn new(transport: T, credentials: Credentials) -> Self {
        GithubClient { transport, base: API_BASE.into(), credentials }
    }

    fn headers(&self) -> Vec<(&'static str, String)> {
        let mut h = vec![
            ("Accept", "application/vnd.github+json".to_string()),
            ("User-Agent", "secdisc".to_string()),
        ];
        if let Some(t) = &self.credentials.token {
            h.push(("Authorization", format!("Bearer {t}")));
        }
        h
    }

    /// Follows `Link: rel="next"` until the last page.
    fn paginate<D: DeserializeOwned>(&self, first: String, repo: &str) -> Result<Vec<D>, IngestError> {
        let headers = self.headers();
        let mut out = Vec::new();
        let mut url = Some(first);
        while let Some(u) = url {
            let resp = self.transport.get(&u, &headers)?;
            if resp.status != 200 {
                return Err(status_error(&resp, &u, repo));
            }
            let page: Vec<D> = serde_json::from_str(&resp.body)
                .map_err(|e| IngestError::Malformed { path: u.clone(), message: e.to_string() })?;
            out.extend(page);
            url = resp.header("link").and_then(next_link);
        }
        Ok(out)
    }

    pub fn fetch(&self, query: &SourceQuery) -> Result<Vec<RawDocument>, IngestError> {
        query.validate()?;
        let repo = &query.repo_or_site;
        let issues: Vec<Issue> = self.paginate(
            format!("{}/repos/{repo}/issues?state={}&per_page=100", self.base, query.issue_state.as_str()),
            repo,
        )?;
        let comments: Vec<Comment> =
            self.paginate(format!("{}/repos/{repo}/issues/comments?per_page=100", self.base), repo)?;
        Ok(to_documents(repo, query.issue_state, issues, comments))
    }
}
