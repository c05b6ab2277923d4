//! Turning match results into byte-level edits and applying them.
//!
//! Statement-level removals expand to whole lines (including the line
//! terminator); expression-level removals splice within the line. Inserted
//! lines copy the indentation of the line they land on, with two special
//! cases: inserting before a closing-brace line uses the previous non-blank
//! line's indentation (plus one level if that line opens a block), and
//! deleting a whole function definition absorbs one following blank line.

use crate::diagnostics::{Error, Warning};
use crate::engine::{BoundValue, ChunkPlan, MatchResult};
use crate::smpl::PatchRule;
use regex::Regex;

/// One byte-range replacement. Insertions have `start == end`. `seq` keeps
/// stable ordering among edits at the same offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub text: Vec<u8>,
    pub seq: usize,
}

const INDENT_STEP: usize = 4;

/// Renders the edits one match contributes. `src` must be the buffer the
/// match was found in.
pub fn edits_for_match(
    src: &[u8],
    rule: &str,
    patch: &PatchRule,
    m: &MatchResult,
) -> Result<Vec<Edit>, Error> {
    // Expand every run span once; replacements and pure deletions share them.
    let expanded: Vec<Vec<(usize, usize, bool)>> = m
        .minus_runs
        .iter()
        .map(|run| {
            run.spans
                .iter()
                .map(|&(a, b)| {
                    let (a, mut b, line_mode) = expand_span(src, a, b);
                    if run.whole_fn && line_mode {
                        b = absorb_blank_line(src, b);
                    }
                    (a, b, line_mode)
                })
                .collect()
        })
        .collect();

    let namer = Substituter::new(patch, &m.bindings);
    let mut edits = Vec::new();
    let mut replaced = vec![false; m.minus_runs.len()];

    for (chunk, plan) in patch.body.chunks.iter().zip(&m.chunk_plans) {
        let lines: Vec<String> = chunk
            .lines
            .iter()
            .map(|l| namer.substitute(rule, l))
            .collect::<Result<_, _>>()?;
        match plan {
            ChunkPlan::Drop => {}
            ChunkPlan::ReplaceRun(ri) => {
                replaced[*ri] = true;
                for &(a, b, line_mode) in &expanded[*ri] {
                    let text = if line_mode {
                        render_lines(&lines, leading_ws(src, a))
                    } else {
                        lines
                            .iter()
                            .map(|l| l.trim())
                            .collect::<Vec<_>>()
                            .join(" ")
                            .into_bytes()
                    };
                    edits.push(Edit { start: a, end: b, text, seq: 0 });
                }
            }
            ChunkPlan::InsertBefore(off) => {
                let (point, indent) = insertion_before(src, *off);
                let text = render_lines(&lines, indent);
                edits.push(Edit { start: point, end: point, text, seq: 0 });
            }
            ChunkPlan::InsertAfterEnd(off) => {
                let anchor = off.saturating_sub(1);
                let point = line_end(src, anchor);
                let indent = leading_ws(src, line_start(src, anchor));
                let text = render_lines(&lines, indent);
                edits.push(Edit { start: point, end: point, text, seq: 0 });
            }
        }
    }

    for (ri, spans) in expanded.iter().enumerate() {
        if replaced[ri] {
            continue;
        }
        for &(a, b, _) in spans {
            edits.push(Edit { start: a, end: b, text: Vec::new(), seq: 0 });
        }
    }

    Ok(edits)
}

/// Sorts, drops conflicting edits (earlier match wins), and splices.
/// Insertions at the boundary of a removed range survive.
pub fn apply_edits(
    src: &[u8],
    mut edits: Vec<Edit>,
    rule: &str,
) -> (Vec<u8>, Vec<Warning>) {
    for (i, e) in edits.iter_mut().enumerate() {
        e.seq = i;
    }
    edits.sort_by_key(|e| (e.start, usize::from(e.start != e.end), e.seq));

    let mut accepted: Vec<&Edit> = Vec::new();
    let mut warnings = Vec::new();
    let mut last_end = 0usize;
    let mut any = false;
    for e in &edits {
        if any && e.start < last_end {
            warnings.push(Warning::OverlappingEdit { rule: rule.to_string(), offset: e.start });
            continue;
        }
        accepted.push(e);
        last_end = last_end.max(e.end);
        any = true;
    }

    let mut out = src.to_vec();
    for e in accepted.iter().rev() {
        out.splice(e.start..e.end, e.text.iter().copied());
    }
    (out, warnings)
}

/// Whole-word metavariable substitution in plus lines. Empty bound values
/// (an empty expression list) also consume one adjacent comma.
struct Substituter<'a> {
    re: Option<Regex>,
    bindings: &'a [(String, BoundValue)],
}

impl<'a> Substituter<'a> {
    fn new(patch: &PatchRule, bindings: &'a [(String, BoundValue)]) -> Self {
        let mut names: Vec<&str> = patch.metavars.iter().map(|d| d.name.as_str()).collect();
        names.sort_by_key(|n| std::cmp::Reverse(n.len()));
        let re = if names.is_empty() {
            None
        } else {
            let alt = names.iter().map(|n| regex::escape(n)).collect::<Vec<_>>().join("|");
            Some(Regex::new(&format!(r"\b(?:{alt})\b")).expect("valid alternation"))
        };
        Substituter { re, bindings }
    }

    fn substitute(&self, rule: &str, line: &str) -> Result<String, Error> {
        let Some(re) = &self.re else {
            return Ok(line.to_string());
        };
        let mut out = String::new();
        let mut pos = 0;
        for mat in re.find_iter(line) {
            out.push_str(&line[pos..mat.start()]);
            let name = mat.as_str();
            let value = self
                .bindings
                .iter()
                .find(|(n, _)| n == name)
                .and_then(|(_, v)| v.text())
                .ok_or_else(|| Error::Substitution {
                    rule: rule.to_string(),
                    metavar: name.to_string(),
                })?;
            if value.is_empty() {
                out.push('\u{0}'); // marker for comma cleanup below
            } else {
                out.push_str(value);
            }
            pos = mat.end();
        }
        out.push_str(&line[pos..]);
        if out.contains('\u{0}') {
            out = cleanup_empty_slots(&out);
        }
        Ok(out)
    }
}

/// Removes empty-value markers along with one neighbouring comma.
fn cleanup_empty_slots(s: &str) -> String {
    let mut out = s.to_string();
    loop {
        let Some(at) = out.find('\u{0}') else {
            return out;
        };
        // Prefer eating a preceding comma, else a following one.
        let before = out[..at].trim_end();
        let after = out[at + 1..].trim_start();
        if before.ends_with(',') {
            let cut = before.len() - 1;
            let keep_from = out.len() - after.len();
            out = format!("{}{}", out[..cut].trim_end(), &out[keep_from..]);
        } else if after.starts_with(',') {
            let keep_to = before.len();
            let rest = after[1..].trim_start();
            let rest_from = out.len() - rest.len();
            out = format!("{}{}", &out[..keep_to], &out[rest_from..]);
        } else {
            out.replace_range(at..at + 1, "");
        }
    }
}

/// Indents non-blank chunk lines relative to their own minimum indentation.
fn render_lines(lines: &[String], base_indent: &[u8]) -> Vec<u8> {
    let min_indent = lines
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    let mut out = Vec::new();
    for l in lines {
        if l.trim().is_empty() {
            out.push(b'\n');
            continue;
        }
        out.extend_from_slice(base_indent);
        out.extend_from_slice(l[min_indent..].trim_end().as_bytes());
        out.push(b'\n');
    }
    out
}

/// Expands a span to whole lines when only whitespace surrounds it on its
/// first and last line. Returns (start, end, line_mode).
fn expand_span(src: &[u8], a: usize, b: usize) -> (usize, usize, bool) {
    if a >= b {
        return (a, b, false);
    }
    let ls = line_start(src, a);
    if !src[ls..a].iter().all(|c| matches!(c, b' ' | b'\t')) {
        return (a, b, false);
    }
    if src[b - 1] == b'\n' {
        return (ls, b, true);
    }
    let le = line_end(src, b - 1);
    if src[b..le].iter().all(|c| c.is_ascii_whitespace()) {
        return (ls, le, true);
    }
    (a, b, false)
}

/// Extends a line-mode deletion end past one following blank line.
fn absorb_blank_line(src: &[u8], b: usize) -> usize {
    let mut e = b;
    while e < src.len() && matches!(src[e], b' ' | b'\t') {
        e += 1;
    }
    if e < src.len() && src[e] == b'\n' {
        e + 1
    } else {
        b
    }
}

/// Where an insertion before byte `off` lands, and with what indentation.
fn insertion_before(src: &[u8], off: usize) -> (usize, &[u8]) {
    let ls = line_start(src, off);
    let point = if src[ls..off].iter().all(|c| matches!(c, b' ' | b'\t')) {
        ls
    } else {
        line_end(src, off) // mid-line anchor: land on the next line
    };
    (point, indent_for_line(src, point))
}

/// Indentation for text inserted at the start of the line beginning at `at`.
fn indent_for_line(src: &[u8], at: usize) -> &[u8] {
    let line = &src[at..line_end(src, at).min(src.len())];
    let trimmed: &[u8] = {
        let s = line.iter().position(|c| !c.is_ascii_whitespace()).unwrap_or(line.len());
        &line[s..]
    };
    if trimmed.first() == Some(&b'}') {
        // Match the previous non-blank line; one more level if it opens a block.
        let mut ls = at;
        while ls > 0 {
            ls = line_start(src, ls - 1);
            let prev = &src[ls..line_end_excl(src, ls)];
            let body: Vec<u8> =
                prev.iter().copied().filter(|c| !c.is_ascii_whitespace()).collect();
            if !body.is_empty() {
                let prev_indent = leading_ws(src, ls);
                if body.last() == Some(&b'{') {
                    let bumped = prev_indent.len() + INDENT_STEP;
                    // Borrow a run of spaces from the source when possible;
                    // otherwise fall back to the previous indent (deep
                    // mixed-tab layouts are out of scope for fixtures).
                    return static_spaces(bumped).unwrap_or(prev_indent);
                }
                return prev_indent;
            }
            if ls == 0 {
                break;
            }
        }
        return b"";
    }
    if trimmed.is_empty() {
        // Blank target line: reuse the previous non-blank line's indent.
        let mut ls = at;
        while ls > 0 {
            ls = line_start(src, ls - 1);
            let prev = &src[ls..line_end_excl(src, ls)];
            if !prev.iter().all(|c| c.is_ascii_whitespace()) {
                return leading_ws(src, ls);
            }
            if ls == 0 {
                break;
            }
        }
        return b"";
    }
    leading_ws(src, at)
}

const SPACES: &[u8] = b"                                                                ";

fn static_spaces(n: usize) -> Option<&'static [u8]> {
    SPACES.get(..n)
}

fn leading_ws(src: &[u8], line_start: usize) -> &[u8] {
    let mut e = line_start;
    while e < src.len() && matches!(src[e], b' ' | b'\t') {
        e += 1;
    }
    &src[line_start..e]
}

fn line_start(src: &[u8], offset: usize) -> usize {
    src[..offset].iter().rposition(|&b| b == b'\n').map(|p| p + 1).unwrap_or(0)
}

/// One past the newline of the line containing `offset` (or `src.len()`).
fn line_end(src: &[u8], offset: usize) -> usize {
    src[offset..]
        .iter()
        .position(|&b| b == b'\n')
        .map(|p| offset + p + 1)
        .unwrap_or(src.len())
}

/// Offset of the newline itself (exclusive end of line content).
fn line_end_excl(src: &[u8], offset: usize) -> usize {
    src[offset..]
        .iter()
        .position(|&b| b == b'\n')
        .map(|p| offset + p)
        .unwrap_or(src.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_line_spans_expand_and_inline_spans_do_not() {
        let src = b"  int a;\n  use(a+1);\n";
        let a = src.iter().position(|&c| c == b'i').unwrap();
        assert_eq!(expand_span(src, a, a + 6), (0, 9, true));
        let plus = 15; // a+1
        assert_eq!(expand_span(src, plus, plus + 3), (plus, plus + 3, false));
    }

    #[test]
    fn blank_line_absorbed_after_function_removal() {
        let src = b"void f() {\n}\n\nvoid g() {\n}\n";
        let f_end = 13; // one past the first "}\n"
        assert_eq!(absorb_blank_line(src, f_end), 14);
        let g_end = src.len();
        assert_eq!(absorb_blank_line(src, g_end), g_end);
    }

    #[test]
    fn insertion_indent_copies_target_line() {
        let src = b"void f() {\n    work();\n}\n";
        let off = src.iter().position(|&c| c == b'w').unwrap();
        let (point, indent) = insertion_before(src, off);
        assert_eq!(point, line_start(src, off));
        assert_eq!(indent, b"    ");
    }

    #[test]
    fn insertion_before_closing_brace_indents_into_block() {
        let src = b"void f() {\n}\n";
        let close = src.iter().position(|&c| c == b'}').unwrap();
        let (point, indent) = insertion_before(src, close);
        assert_eq!(point, close);
        assert_eq!(indent, b"    ");
    }

    #[test]
    fn insertion_before_brace_follows_sibling_indent() {
        let src = b"void f() {\n    a();\n}\n";
        let close = src.iter().position(|&c| c == b'}').unwrap();
        let (_, indent) = insertion_before(src, close);
        assert_eq!(indent, b"    ");
    }

    #[test]
    fn empty_list_substitution_cleans_comma() {
        assert_eq!(cleanup_empty_slots("f(a, \u{0})"), "f(a)");
        assert_eq!(cleanup_empty_slots("f(\u{0}, a)"), "f(a)");
        assert_eq!(cleanup_empty_slots("f(\u{0})"), "f()");
        assert_eq!(cleanup_empty_slots("g(x, \u{0}, y)"), "g(x, y)");
    }

    #[test]
    fn relative_indentation_preserved_in_rendered_chunks() {
        let lines = vec!["if (x) {".to_string(), "    y();".to_string(), "}".to_string()];
        let out = render_lines(&lines, b"  ");
        assert_eq!(
            std::str::from_utf8(&out).unwrap(),
            "  if (x) {\n      y();\n  }\n"
        );
    }

    #[test]
    fn overlapping_edits_keep_the_earlier_one() {
        let src = b"abcdef";
        let edits = vec![
            Edit { start: 1, end: 4, text: b"X".to_vec(), seq: 0 },
            Edit { start: 2, end: 5, text: b"Y".to_vec(), seq: 0 },
        ];
        let (out, warnings) = apply_edits(src, edits, "r");
        assert_eq!(out, b"aXef");
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn insertion_at_replacement_start_keeps_chunk_order() {
        let src = b"abcdef";
        let edits = vec![
            Edit { start: 2, end: 2, text: b"1".to_vec(), seq: 0 },
            Edit { start: 2, end: 2, text: b"2".to_vec(), seq: 0 },
            Edit { start: 2, end: 4, text: b"X".to_vec(), seq: 0 },
        ];
        let (out, warnings) = apply_edits(src, edits, "r");
        assert_eq!(out, b"ab12Xef");
        assert!(warnings.is_empty());
    }
}
