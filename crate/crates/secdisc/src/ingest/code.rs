//! Removal of code from markdown and HTML bodies.

/// Removes HTML `<pre>`/`<code>` elements, fenced and indented markdown code
/// blocks and inline code spans. Returns the remaining text and the number
/// of code fragments removed. An unclosed fence or element runs to the end.
pub fn strip_code(text: &str) -> (String, usize) {
    let (text, pre) = strip_element(text, "pre");
    let (text, code) = strip_element(&text, "code");
    let (text, blocks) = strip_blocks(&text);
    let (text, spans) = strip_spans(&text);
    (text, pre + code + blocks + spans)
}

/// Byte offset of the next `<tag` opening (`<tag>` or `<tag attr..>`),
/// matched case-insensitively.
fn find_open(lower: &str, from: usize, tag: &str) -> Option<usize> {
    let needle = format!("<{tag}");
    let mut at = from;
    while let Some(i) = lower[at..].find(&needle) {
        let start = at + i;
        match lower[start + needle.len()..].chars().next() {
            Some(c) if c == '>' || c.is_whitespace() || c == '/' => return Some(start),
            _ => at = start + needle.len(),
        }
    }
    None
}

fn strip_element(text: &str, tag: &str) -> (String, usize) {
    let lower = text.to_ascii_lowercase();
    let close = format!("</{tag}>");
    let mut out = String::with_capacity(text.len());
    let mut removed = 0;
    let mut at = 0;
    while let Some(start) = find_open(&lower, at, tag) {
        out.push_str(&text[at..start]);
        removed += 1;
        at = match lower[start..].find(&close) {
            Some(end) => start + end + close.len(),
            None => text.len(),
        };
    }
    out.push_str(&text[at..]);
    (out, removed)
}

fn indent_width(line: &str) -> usize {
    let mut w = 0;
    for c in line.chars() {
        match c {
            ' ' => w += 1,
            '\t' => w += 4 - w % 4,
            _ => break,
        }
    }
    w
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// `(fence char, run length)` when `line` opens a fence.
fn fence_open(line: &str) -> Option<(char, usize)> {
    if indent_width(line) > 3 {
        return None;
    }
    let t = line.trim_start();
    let c = t.chars().next().filter(|&c| c == '`' || c == '~')?;
    let run = t.chars().take_while(|&x| x == c).count();
    if run < 3 || (c == '`' && t[run..].contains('`')) {
        return None;
    }
    Some((c, run))
}

fn closes_fence(line: &str, c: char, run: usize) -> bool {
    let t = line.trim();
    indent_width(line) <= 3 && t.chars().count() >= run && t.chars().all(|x| x == c)
}

/// Fenced blocks, and indented blocks that start after a blank line.
fn strip_blocks(text: &str) -> (String, usize) {
    let lines: Vec<&str> = text.split('\n').collect();
    let mut kept: Vec<&str> = Vec::with_capacity(lines.len());
    let mut removed = 0;
    let mut after_blank = true;
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        if let Some((c, run)) = fence_open(line) {
            removed += 1;
            i += 1;
            while i < lines.len() && !closes_fence(lines[i], c, run) {
                i += 1;
            }
            i += 1;
            after_blank = true;
            continue;
        }
        if after_blank && !is_blank(line) && indent_width(line) >= 4 {
            removed += 1;
            let mut last = i;
            let mut j = i;
            while j < lines.len() {
                if is_blank(lines[j]) {
                    j += 1;
                } else if indent_width(lines[j]) >= 4 {
                    last = j;
                    j += 1;
                } else {
                    break;
                }
            }
            i = last + 1;
            after_blank = true;
            continue;
        }
        kept.push(line);
        after_blank = is_blank(line);
        i += 1;
    }
    (kept.join("\n"), removed)
}

/// Backtick spans: a run of `n` backticks up to the next run of exactly `n`.
/// A run without a partner is literal text.
fn strip_spans(text: &str) -> (String, usize) {
    let b = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut removed = 0;
    let mut at = 0;
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'`' {
            i += 1;
            continue;
        }
        let run = b[i..].iter().take_while(|&&c| c == b'`').count();
        let mut j = i + run;
        let mut close = None;
        while j < b.len() {
            if b[j] == b'`' {
                let r = b[j..].iter().take_while(|&&c| c == b'`').count();
                if r == run {
                    close = Some(j + r);
                    break;
                }
                j += r;
            } else {
                j += 1;
            }
        }
        match close {
            Some(end) => {
                out.push_str(&text[at..i]);
                removed += 1;
                at = end;
                i = end;
            }
            None => i += run,
        }
    }
    out.push_str(&text[at..]);
    (out, removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fenced_block_between_prose() {
        assert_eq!(strip_code("A\n```\nx=1\n```\nB"), ("A\nB".to_string(), 1));
        assert_eq!(strip_code("A\n~~~~ rust\nlet x;\n~~~~\nB"), ("A\nB".to_string(), 1));
    }

    #[test]
    fn inline_span() {
        assert_eq!(strip_code("use `jwt` here"), ("use  here".to_string(), 1));
        assert_eq!(strip_code("a ``x ` y`` b"), ("a  b".to_string(), 1));
        assert_eq!(strip_code("a ` lone"), ("a ` lone".to_string(), 0));
    }

    #[test]
    fn prose_is_untouched() {
        let t = "Plain text.\n\nSecond   paragraph\n  indented two";
        assert_eq!(strip_code(t), (t.to_string(), 0));
    }

    #[test]
    fn unclosed_fence_runs_to_the_end() {
        assert_eq!(strip_code("keep\n```\nsecret = 1\nmore"), ("keep".to_string(), 1));
    }

    #[test]
    fn indented_blocks_need_a_blank_line_before() {
        let t = "Intro:\n\n    let a = 1;\n\n    let b = 2;\nAfter";
        assert_eq!(strip_code(t), ("Intro:\n\nAfter".to_string(), 1));
        let cont = "line one\n    continued";
        assert_eq!(strip_code(cont), (cont.to_string(), 0));
    }

    #[test]
    fn html_code_elements() {
        let t = "<p>Use</p><pre><code>x = 1\n</code></pre><p>and <code>jwt</code> or <CODE class=\"k\">k</CODE>.</p>";
        assert_eq!(strip_code(t), ("<p>Use</p><p>and  or .</p>".to_string(), 3));
        assert_eq!(strip_code("<p>a</p><pre>open"), ("<p>a</p>".to_string(), 1));
        assert_eq!(strip_code("<preview>x</preview>"), ("<preview>x</preview>".to_string(), 0));
    }

    proptest! {
        #[test]
        fn fenced_code_never_survives(
            prose in proptest::collection::vec("[a-z][a-z ]{0,19}", 1..6),
            blocks in proptest::collection::vec(proptest::collection::vec("[a-z=;(){} ]{0,15}", 0..4), 0..4),
        ) {
            let mut parts = Vec::new();
            for (k, p) in prose.iter().enumerate() {
                parts.push(p.clone());
                if let Some(b) = blocks.get(k) {
                    parts.push("```".to_string());
                    parts.extend(b.iter().map(|l| format!("CODE{l}")));
                    parts.push("```".to_string());
                }
            }
            let text = parts.join("\n");
            let (out, n) = strip_code(&text);
            prop_assert_eq!(n, blocks.len().min(prose.len()));
            prop_assert!(!out.contains("CODE") && !out.contains("```"));
            for p in &prose {
                prop_assert!(out.contains(p.as_str()));
            }
        }
    }
}
