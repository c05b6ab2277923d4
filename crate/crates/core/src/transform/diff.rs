//! Unified diff emission and (re)application.
//!
//! The emitter produces standard unified hunks with three context lines and
//! `\ No newline at end of file` markers; `apply_unified_diff` applies such a
//! patch strictly (context and deletions must match byte-for-byte), which is
//! also how the round-trip invariant `apply(old, diff(old, new)) == new` is
//! checked in tests.

use crate::diagnostics::Error;

const CONTEXT: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Eq,
    Del,
    Ins,
}

fn split_lines(b: &[u8]) -> Vec<&[u8]> {
    b.split_inclusive(|&c| c == b'\n').collect()
}

/// Longest-common-subsequence edit script over lines.
fn line_ops<'a>(a: &[&'a [u8]], b: &[&'a [u8]]) -> Vec<(Op, usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut dp = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i * w + j] = if a[i] == b[j] {
                dp[(i + 1) * w + j + 1] + 1
            } else {
                dp[(i + 1) * w + j].max(dp[i * w + j + 1])
            };
        }
    }
    let mut ops = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            ops.push((Op::Eq, i, j));
            i += 1;
            j += 1;
        } else if dp[(i + 1) * w + j] >= dp[i * w + j + 1] {
            ops.push((Op::Del, i, j));
            i += 1;
        } else {
            ops.push((Op::Ins, i, j));
            j += 1;
        }
    }
    while i < n {
        ops.push((Op::Del, i, j));
        i += 1;
    }
    while j < m {
        ops.push((Op::Ins, i, j));
        j += 1;
    }
    ops
}

/// Renders a unified diff; empty string when the inputs are identical.
pub fn unified_diff(old: &[u8], new: &[u8], old_label: &str, new_label: &str) -> String {
    if old == new {
        return String::new();
    }
    let a = split_lines(old);
    let b = split_lines(new);
    let ops = line_ops(&a, &b);

    // Cluster changed ops, pad with context, merge overlapping clusters.
    let mut clusters: Vec<(usize, usize)> = Vec::new(); // inclusive op ranges
    let mut k = 0;
    while k < ops.len() {
        if ops[k].0 == Op::Eq {
            k += 1;
            continue;
        }
        let mut end = k;
        let mut gap = 0;
        let mut x = k + 1;
        while x < ops.len() {
            if ops[x].0 == Op::Eq {
                gap += 1;
                if gap > 2 * CONTEXT {
                    break;
                }
            } else {
                end = x;
                gap = 0;
            }
            x += 1;
        }
        clusters.push((k.saturating_sub(CONTEXT), (end + CONTEXT).min(ops.len() - 1)));
        k = end + 1;
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for c in clusters {
        match merged.last_mut() {
            Some(last) if c.0 <= last.1 + 1 => last.1 = last.1.max(c.1),
            _ => merged.push(c),
        }
    }

    let mut out = format!("--- {old_label}\n+++ {new_label}\n");
    for (s, e) in merged {
        let old_start = ops[s].1;
        let new_start = ops[s].2;
        let mut old_count = 0usize;
        let mut new_count = 0usize;
        for &(op, _, _) in &ops[s..=e] {
            match op {
                Op::Eq => {
                    old_count += 1;
                    new_count += 1;
                }
                Op::Del => old_count += 1,
                Op::Ins => new_count += 1,
            }
        }
        out.push_str("@@ -");
        push_range(&mut out, old_start, old_count);
        out.push_str(" +");
        push_range(&mut out, new_start, new_count);
        out.push_str(" @@\n");
        for &(op, oi, ni) in &ops[s..=e] {
            match op {
                Op::Eq => push_line(&mut out, ' ', a[oi]),
                Op::Del => push_line(&mut out, '-', a[oi]),
                Op::Ins => push_line(&mut out, '+', b[ni]),
            }
        }
    }
    out
}

fn push_range(out: &mut String, start0: usize, count: usize) {
    let start1 = if count == 0 { start0 } else { start0 + 1 };
    if count == 1 {
        out.push_str(&start1.to_string());
    } else {
        out.push_str(&format!("{start1},{count}"));
    }
}

fn push_line(out: &mut String, tag: char, line: &[u8]) {
    out.push(tag);
    out.push_str(&String::from_utf8_lossy(line));
    if !line.ends_with(b"\n") {
        out.push_str("\n\\ No newline at end of file\n");
    }
}

/// Applies a unified diff produced by `unified_diff` (or an equivalent one).
pub fn apply_unified_diff(old: &[u8], patch: &str) -> Result<Vec<u8>, Error> {
    let old_lines = split_lines(old);
    let mut out: Vec<u8> = Vec::new();
    let mut pos = 0usize;

    let mut it = patch.lines().peekable();
    while let Some(line) = it.next() {
        if line.starts_with("--- ") || line.starts_with("+++ ") || line.starts_with("diff ") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("@@ -") {
            let (old_start, old_count) = parse_range(rest)?;
            let target = if old_count == 0 { old_start } else { old_start - 1 };
            if target < pos || target > old_lines.len() {
                return Err(Error::Other(format!(
                    "hunk target line {old_start} out of order"
                )));
            }
            for l in &old_lines[pos..target] {
                out.extend_from_slice(l);
            }
            pos = target;
            continue;
        }
        let (tag, content) = match line.chars().next() {
            Some(' ') => (' ', &line[1..]),
            Some('-') => ('-', &line[1..]),
            Some('+') => ('+', &line[1..]),
            Some('\\') => continue, // handled via peek below
            None => (' ', ""),      // empty context line
            Some(other) => {
                return Err(Error::Other(format!("unexpected diff line `{other}...`")))
            }
        };
        let no_newline = matches!(it.peek(), Some(l) if l.starts_with('\\'));
        match tag {
            ' ' | '-' => {
                let have = old_lines.get(pos).copied().unwrap_or(b"");
                let want_nl = !no_newline;
                let matches_line = if want_nl {
                    have.strip_suffix(b"\n").map(|h| h == content.as_bytes()).unwrap_or(false)
                        || (have == content.as_bytes() && pos + 1 == old_lines.len())
                } else {
                    have == content.as_bytes()
                };
                if !matches_line {
                    return Err(Error::Other(format!(
                        "patch mismatch at source line {}: expected `{}`",
                        pos + 1,
                        content
                    )));
                }
                if tag == ' ' {
                    out.extend_from_slice(have);
                }
                pos += 1;
            }
            '+' => {
                out.extend_from_slice(content.as_bytes());
                if !no_newline {
                    out.push(b'\n');
                }
            }
            _ => unreachable!(),
        }
    }
    for l in &old_lines[pos..] {
        out.extend_from_slice(l);
    }
    Ok(out)
}

fn parse_range(rest: &str) -> Result<(usize, usize), Error> {
    let range = rest
        .split_whitespace()
        .next()
        .ok_or_else(|| Error::Other("malformed hunk header".to_string()))?;
    let (s, c) = match range.split_once(',') {
        Some((s, c)) => (s, c),
        None => (range, "1"),
    };
    let start: usize = s
        .parse()
        .map_err(|_| Error::Other(format!("bad hunk start `{s}`")))?;
    let count: usize = c
        .parse()
        .map_err(|_| Error::Other(format!("bad hunk count `{c}`")))?;
    Ok((start, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(old: &str, new: &str) {
        let d = unified_diff(old.as_bytes(), new.as_bytes(), "a/f.c", "b/f.c");
        let re = apply_unified_diff(old.as_bytes(), &d).expect("applies");
        assert_eq!(
            String::from_utf8_lossy(&re),
            new,
            "diff was:\n{d}"
        );
    }

    #[test]
    fn identical_inputs_produce_empty_diff() {
        assert_eq!(unified_diff(b"x\n", b"x\n", "a", "b"), "");
        assert_eq!(apply_unified_diff(b"x\n", "").unwrap(), b"x\n");
    }

    #[test]
    fn single_line_change_has_three_context_lines() {
        let old = "a\nb\nc\nd\ne\nf\ng\nh\n";
        let new = "a\nb\nc\nD\ne\nf\ng\nh\n";
        let d = unified_diff(old.as_bytes(), new.as_bytes(), "a/x", "b/x");
        assert!(d.contains("@@ -1,7 +1,7 @@"), "{d}");
        assert!(d.contains("\n-d\n+D\n"), "{d}");
        roundtrip(old, new);
    }

    #[test]
    fn distant_changes_produce_separate_hunks() {
        let old: String = (0..30).map(|i| format!("l{i}\n")).collect();
        let new = old.replace("l2\n", "L2\n").replace("l25\n", "L25\n");
        let d = unified_diff(old.as_bytes(), new.as_bytes(), "a/x", "b/x");
        assert_eq!(d.matches("@@").count() / 2, 2, "{d}");
        roundtrip(&old, &new);
    }

    #[test]
    fn nearby_changes_merge_into_one_hunk() {
        let old: String = (0..12).map(|i| format!("l{i}\n")).collect();
        let new = old.replace("l3\n", "L3\n").replace("l7\n", "L7\n");
        let d = unified_diff(old.as_bytes(), new.as_bytes(), "a/x", "b/x");
        assert_eq!(d.matches("@@").count() / 2, 1, "{d}");
        roundtrip(&old, &new);
    }

    #[test]
    fn insertion_and_deletion_roundtrip() {
        roundtrip("a\nb\nc\n", "a\nx\ny\nb\n");
        roundtrip("a\nb\nc\nd\n", "b\nd\n");
        roundtrip("", "fresh\n");
        roundtrip("gone\n", "");
    }

    #[test]
    fn missing_trailing_newline_tracked_on_both_sides() {
        roundtrip("a\nb", "a\nb\n");
        roundtrip("a\nb\n", "a\nb");
        roundtrip("x", "y");
    }

    #[test]
    fn mismatched_context_is_rejected() {
        let d = unified_diff(b"a\nb\nc\n", b"a\nX\nc\n", "a/x", "b/x");
        assert!(apply_unified_diff(b"a\nZ\nc\n", &d).is_err());
    }
}
