//! Writes the deterministic 581-paragraph synthetic sample used by the
//! end-to-end regression check.
//!
//! `cargo run -p secdisc --example gen_sample -- data/sample581.tsv`

use std::path::PathBuf;

use anyhow::Result;
use rand::seq::SliceRandom;
use rand::Rng;
use secdisc::corpus_io::save_dataset;
use secdisc_core::{seed, Dataset, Label, LabeledParagraph, Paragraph, Source};

const N: usize = 581;
const SEED: u64 = 581;
const POSITIVE_RATE: f64 = 0.36;
/// Share of labels that disagree with the text, as between annotators.
const LABEL_NOISE: f64 = 0.05;

/// Slots marked `true` hold security vocabulary and feed the annotated words.
const SLOTS: &[(&str, bool, &[&str])] = &[
    ("CRED", true, &["password", "api key", "secret", "access token", "private key", "credential"]),
    ("AUTH", true, &["jwt", "oauth", "session cookie", "csrf token", "authentication", "authorization"]),
    ("VULN", true, &["xss", "sql injection", "csrf", "buffer overflow", "path traversal", "remote code execution"]),
    ("CRYPTO", true, &["bcrypt", "sha256", "tls", "ssl certificate", "encryption", "aes"]),
    ("ATTACK", true, &["attacker", "exploit", "malicious user", "hacker", "brute force", "phishing"]),
    ("DEFENSE", true, &["sanitize", "escape", "validate", "rate limit", "audit", "permission check"]),
    ("COMP", false, &["parser", "scheduler", "renderer", "cache layer", "build script", "cli", "dashboard"]),
    ("TOOL", false, &["webpack", "docker", "cargo", "gradle", "eslint", "kubernetes", "npm"]),
    ("PERF", false, &["latency", "memory usage", "startup time", "throughput", "cpu load"]),
    ("UI", false, &["button", "dropdown", "sidebar", "modal", "tooltip", "dark theme"]),
    ("DOC", false, &["readme", "changelog", "tutorial", "api reference", "migration guide"]),
    ("VER", false, &["1.4", "2.0", "3.1.2", "0.9", "the nightly build", "the last release"]),
];

const SECURITY: &[&str] = &[
    "The login endpoint returns the {CRED} in the response body, so an {ATTACK} who sniffs the traffic can take over the account.",
    "We should {DEFENSE} every field before it reaches the template, otherwise {VULN} is trivial.",
    "Storing the {CRED} in plain text is risky; please switch to {CRYPTO} before the next release.",
    "The {AUTH} is never verified on the server, which lets an {ATTACK} forge requests for other users.",
    "I reported a {VULN} in the upload handler privately; a fix with a proper {DEFENSE} is in review.",
    "Is {CRYPTO} enough here, or does the {CRED} also need to be rotated after the leak?",
    "Without a {DEFENSE} on the admin route any logged in user can delete projects, that is a privilege escalation.",
    "The {AUTH} expires after a year, so a stolen token stays valid far too long.",
    "Our scanner flagged {VULN} in the {COMP}; can someone confirm whether user input reaches it?",
    "Please do not paste your {CRED} into issues, anyone can read them and {ATTACK} bots scrape this site.",
    "Enabling {CRYPTO} for the internal traffic closes the man in the middle hole we discussed.",
    "An {ATTACK} could chain the open redirect with {VULN} to steal the {AUTH}.",
];

/// Security concerns phrased without lexicon words.
const SUBTLE_SECURITY: &[&str] = &[
    "Anyone can read other people's invoices by changing the number at the end of the url.",
    "The debug page shows the full environment, including things that should never leave the server.",
    "If you upload a file named with dots and slashes it ends up outside the upload folder.",
    "The {COMP} logs full request headers, so anything sensitive ends up in the shared log bucket.",
    "Changing the role field in the profile form from the browser console makes you an admin.",
    "The {TOOL} image runs as root and mounts the host socket, which gives containers full control of the machine.",
];

const NEUTRAL: &[&str] = &[
    "After upgrading to {VER} the {COMP} takes twice as long to start; {PERF} went up noticeably.",
    "Could we move the {UI} to the left? On small screens it covers the content.",
    "The {DOC} still describes the old flags, I will open a pull request to update it.",
    "Building with {TOOL} fails on Windows because the path separator is hard coded in the {COMP}.",
    "I profiled the {COMP} and most of the {PERF} comes from reallocating the buffer in a loop.",
    "Thanks, that fixed it. Closing this since {VER} includes the patch.",
    "The {UI} flickers when switching tabs; it looks like a state update race in the {COMP}.",
    "Would you accept a contribution that adds a {TOOL} config so new contributors can start faster?",
    "The tests are flaky on CI, probably because the {COMP} depends on the system clock.",
    "Can you share a minimal example? I cannot reproduce the crash with {VER} and {TOOL}.",
    "We dropped support for the old {TOOL} plugin, see the {DOC} for the replacement.",
    "Sorting the table by date is slow with ten thousand rows; {PERF} is the bottleneck.",
];

/// Non-security text that mentions a security word in passing.
const NEUTRAL_WITH_TERM: &[&str] = &[
    "The {AUTH} section of the {DOC} has a typo in the heading.",
    "Renamed the {CRED} field in the settings {UI} so the label fits.",
    "Moved the {CRYPTO} helpers into their own module to speed up the {TOOL} build.",
    "The {AUTH} tests take most of the CI time after {VER}; can we run them in parallel?",
    "Should the {UI} use the same font as the {CRED} reset page?",
    "Fixed the {DEFENSE} helper so it accepts unicode names; {PERF} is unchanged.",
    "Bumped {CRYPTO} bindings to {VER} to silence a deprecation warning in {TOOL}.",
];

const PROJECTS: &[&str] = &["acme/webapp", "acme/cli", "orbit/server", "orbit/mobile", "quill/editor"];
const SITES: &[&str] = &["stackoverflow.com", "security.stackexchange.com"];

fn fill(template: &str, rng: &mut impl Rng, words: &mut Vec<String>) -> String {
    let mut out = String::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let end = start + rest[start..].find('}').expect("closed slot");
        let (_, security, values) = SLOTS.iter().find(|(n, ..)| *n == &rest[start + 1..end]).expect("known slot");
        let w = values.choose(rng).expect("non-empty slot");
        if *security && !words.iter().any(|x| x == w) {
            words.push(w.to_string());
        }
        out.push_str(w);
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    out
}

fn record(i: usize, rng: &mut impl Rng) -> Result<LabeledParagraph> {
    let security_text = rng.gen_bool(POSITIVE_RATE);
    let mut words = Vec::new();
    let mut parts = Vec::new();
    if security_text {
        let t = if rng.gen_bool(0.2) { SUBTLE_SECURITY } else { SECURITY };
        parts.push(fill(t.choose(rng).expect("templates"), rng, &mut words));
        if rng.gen_bool(0.4) {
            parts.push(fill(NEUTRAL.choose(rng).expect("templates"), rng, &mut Vec::new()));
        }
    } else {
        let t = if rng.gen_bool(0.25) { NEUTRAL_WITH_TERM } else { NEUTRAL };
        parts.push(fill(t.choose(rng).expect("templates"), rng, &mut Vec::new()));
        if rng.gen_bool(0.3) {
            parts.push(fill(NEUTRAL.choose(rng).expect("templates"), rng, &mut Vec::new()));
        }
    }
    parts.shuffle(rng);
    let positive = security_text != rng.gen_bool(LABEL_NOISE);
    let (source, project, document_ref, url) = if i.is_multiple_of(3) {
        let site = SITES.choose(rng).expect("sites");
        let post = 10_000 + i;
        (Source::SoAnswer, site.to_string(), format!("{site}:post-{post}"), format!("https://{site}/a/{post}"))
    } else {
        let repo = PROJECTS.choose(rng).expect("projects");
        let issue = 100 + i;
        (
            Source::GithubIssue,
            repo.to_string(),
            format!("{repo}#issue-{issue}"),
            format!("https://github.com/{repo}/issues/{issue}"),
        )
    };
    let position = rng.gen_range(0..4);
    let paragraph = Paragraph {
        paragraph_id: Paragraph::make_id(&document_ref, position),
        document_ref,
        source,
        project,
        url,
        position,
        text: parts.join(" "),
    };
    Ok(LabeledParagraph::new(paragraph, Label::from_bool(positive), if positive { words } else { Vec::new() })?)
}

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "data/sample581.tsv".into());
    let mut rng = seed::rng(SEED);
    let records = (0..N).map(|i| record(i, &mut rng)).collect::<Result<Vec<_>>>()?;
    let ds = Dataset::new("sample581", "synthetic stand-in written by examples/gen_sample.rs (seed 581)", records)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    save_dataset(&ds, &out)?;
    let pos = ds.labels().iter().filter(|l| l.is_security()).count();
    eprintln!("wrote {} paragraphs ({pos} security) to {}", ds.len(), out.display());
    Ok(())
}
