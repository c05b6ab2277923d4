//! Parser for rule files.
//!
//! A rule file is a sequence of rules. Each rule has a header (`@name@`,
//! `@@`, `@name depends on r@`, `@script:python name@`, or
//! `@initialize:python@`), an optional declaration section terminated by
//! `@@`, and a body. Patch-rule bodies consist of annotated lines: the first
//! column is ` ` (context), `-` (removal), or `+` (insertion); lines holding
//! a single `(`, `|`, `&`, or `)` delimit disjunction/conjunction groups, as
//! do inline `\(`, `\|`, `\&`, `\)` markers. `# spatch --c++[=NN]` comment
//! lines before the first rule record a dialect hint.

use super::ast::*;
use crate::c_frontend::lexer::lex;
use crate::diagnostics::Error;
use regex::Regex;

/// Parses a whole rule file.
pub fn parse_rules(text: &str) -> Result<RuleSet, Error> {
    let lines: Vec<&str> = text.lines().collect();
    let mut dialect_hints = Vec::new();
    let mut rules = Vec::new();
    let mut anon = 0usize;
    let mut i = 0usize;

    while i < lines.len() {
        let line = lines[i];
        let t = line.trim();
        if t.is_empty() || t.starts_with("//") {
            i += 1;
            continue;
        }
        if rules.is_empty() && (t.starts_with("# spatch") || t.starts_with("#spatch")) {
            let rest = t.trim_start_matches('#').trim().trim_start_matches("spatch").trim();
            dialect_hints.push(rest.to_string());
            i += 1;
            continue;
        }
        if t.starts_with('#') && rules.is_empty() {
            // other comment line before the first rule
            i += 1;
            continue;
        }
        if !t.starts_with('@') {
            return Err(Error::smpl(
                format!("expected a rule header, found `{t}`"),
                (i + 1) as u32,
            ));
        }

        let header_line = (i + 1) as u32;
        let (head, decls_inline_done) = split_header(t, header_line)?;
        i += 1;

        // declaration section (absent when the header line ends with `@@`)
        let mut decl_lines: Vec<(u32, &str)> = Vec::new();
        if !decls_inline_done {
            loop {
                if i >= lines.len() {
                    return Err(Error::smpl(
                        "rule declarations not terminated by `@@`",
                        header_line,
                    ));
                }
                let l = lines[i].trim();
                i += 1;
                if l == "@@" {
                    break;
                }
                decl_lines.push((i as u32, lines[i - 1]));
            }
        }

        // body: everything until the next header line or end of file
        let body_start = i;
        while i < lines.len() && !lines[i].trim_start().starts_with('@') {
            i += 1;
        }
        let body: Vec<String> = lines[body_start..i].iter().map(|s| s.to_string()).collect();
        let body_line0 = (body_start + 1) as u32;

        let rule = match head {
            Head::Patch { name, deps } => {
                let name = match name {
                    Some(n) => n,
                    None => {
                        anon += 1;
                        format!("__anon{anon}")
                    }
                };
                let metavars = parse_metavar_decls(&decl_lines)?;
                let body = compile_pattern_body(&body, body_line0, &metavars)?;
                Rule {
                    name,
                    line: header_line,
                    deps,
                    kind: RuleKind::Patch(PatchRule { metavars, body }),
                }
            }
            Head::Script { lang, name, deps } => {
                let (imports, outputs) = parse_script_decls(&decl_lines)?;
                let stmts = parse_script_body(&body, body_line0)?;
                Rule {
                    name,
                    line: header_line,
                    deps,
                    kind: RuleKind::Script(ScriptRule { lang, imports, outputs, stmts }),
                }
            }
            Head::Initialize { lang } => {
                if !decl_lines.iter().all(|(_, l)| l.trim().is_empty()) {
                    return Err(Error::smpl(
                        "initializer rules take no declarations",
                        header_line,
                    ));
                }
                let tables = parse_init_body(&body, body_line0)?;
                anon += 1;
                Rule {
                    name: format!("__anon{anon}"),
                    line: header_line,
                    deps: Vec::new(),
                    kind: RuleKind::Initialize(InitRule { lang, tables }),
                }
            }
        };
        rules.push(rule);
    }

    Ok(RuleSet { rules, dialect_hints })
}

enum Head {
    Patch { name: Option<String>, deps: Vec<Dep> },
    Script { lang: String, name: String, deps: Vec<Dep> },
    Initialize { lang: String },
}

/// Splits a header line into its `@...@` part and notes whether the
/// declaration section was closed inline (`@name@ @@` / `@@ @@`).
fn split_header(line: &str, lineno: u32) -> Result<(Head, bool), Error> {
    let (inner, rest) = if let Some(rest) = line.strip_prefix("@@") {
        ("", rest)
    } else {
        let close = line[1..]
            .find('@')
            .ok_or_else(|| Error::smpl("unterminated rule header", lineno))?;
        (&line[1..=close], &line[close + 2..])
    };
    let rest = rest.trim();
    let decls_done = match rest {
        "" => false,
        "@@" => true,
        other => {
            return Err(Error::smpl(
                format!("unexpected text after rule header: `{other}`"),
                lineno,
            ))
        }
    };

    let inner = inner.trim();
    if let Some(langname) = inner.strip_prefix("script:") {
        let mut parts = langname.trim().split_whitespace();
        let lang = parts
            .next()
            .ok_or_else(|| Error::smpl("missing script language", lineno))?
            .to_string();
        let tail: Vec<&str> = parts.collect();
        let (name, deps) = parse_name_and_deps(&tail.join(" "), lineno)?;
        let name =
            name.ok_or_else(|| Error::smpl("script rules must be named", lineno))?;
        return Ok((Head::Script { lang, name, deps }, decls_done));
    }
    if let Some(lang) = inner.strip_prefix("initialize:") {
        return Ok((Head::Initialize { lang: lang.trim().to_string() }, decls_done));
    }
    let (name, deps) = parse_name_and_deps(inner, lineno)?;
    Ok((Head::Patch { name, deps }, decls_done))
}

fn parse_name_and_deps(s: &str, lineno: u32) -> Result<(Option<String>, Vec<Dep>), Error> {
    let s = s.trim();
    if s.is_empty() {
        return Ok((None, Vec::new()));
    }
    let (name_part, deps_part) = match s.find("depends on") {
        Some(idx) => (&s[..idx], Some(&s[idx + "depends on".len()..])),
        None => (s, None),
    };
    let name_part = name_part.trim();
    let name = if name_part.is_empty() { None } else { Some(name_part.to_string()) };
    if let Some(name) = &name {
        if !is_word(name) {
            return Err(Error::smpl(format!("invalid rule name `{name}`"), lineno));
        }
    }
    let mut deps = Vec::new();
    if let Some(d) = deps_part {
        for part in d.split("&&") {
            let part = part.trim();
            if let Some(r) = part.strip_prefix('!') {
                deps.push(Dep::NotMatched(r.trim().to_string()));
            } else if !part.is_empty() {
                deps.push(Dep::Matched(part.to_string()));
            } else {
                return Err(Error::smpl("empty `depends on` clause", lineno));
            }
        }
    }
    Ok((name, deps))
}

fn is_word(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().map(|c| c.is_ascii_alphabetic() || c == '_').unwrap_or(false)
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// ----- metavariable declarations ---------------------------------------------

const KIND_WORDS: &[(&str, MetavarKind)] = &[
    ("fresh identifier", MetavarKind::FreshIdentifier),
    ("parameter list", MetavarKind::ParameterList),
    ("statement list", MetavarKind::StatementList),
    ("expression list", MetavarKind::ExpressionList),
    ("identifier", MetavarKind::Identifier),
    ("expression", MetavarKind::Expression),
    ("statement", MetavarKind::Statement),
    ("pragmainfo", MetavarKind::PragmaInfo),
    ("constant", MetavarKind::Constant),
    ("position", MetavarKind::Position),
    ("function", MetavarKind::Function),
    ("symbol", MetavarKind::Symbol),
    ("type", MetavarKind::Type),
];

fn parse_metavar_decls(lines: &[(u32, &str)]) -> Result<Vec<MetavarDecl>, Error> {
    let mut out = Vec::new();
    for &(lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let line = line
            .strip_suffix(';')
            .ok_or_else(|| Error::smpl("metavariable declaration must end with `;`", lineno))?
            .trim();
        let Some((kw, kind)) = KIND_WORDS
            .iter()
            .find(|(kw, _)| {
                line.starts_with(kw)
                    && line[kw.len()..].chars().next().map(|c| c.is_whitespace()).unwrap_or(false)
            })
            .copied()
        else {
            return Err(Error::smpl(
                format!("unknown metavariable kind in `{line}`"),
                lineno,
            ));
        };
        let rest = line[kw.len()..].trim();
        for decl in split_top_commas(rest) {
            out.push(parse_one_decl(decl.trim(), kind, lineno)?);
        }
    }
    Ok(out)
}

/// Splits on commas that are not inside braces or string literals.
fn split_top_commas(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut in_str = false;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '{' | '(' if !in_str => depth += 1,
            '}' | ')' if !in_str => depth -= 1,
            ',' if !in_str && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_one_decl(decl: &str, kind: MetavarKind, lineno: u32) -> Result<MetavarDecl, Error> {
    // `name`, `rule.name`, `name =~ "re"`, `name = {a,b}`, `name = "a"##b`
    let (head, tail) = match decl.find(|c| c == '=') {
        Some(i) => (decl[..i].trim(), Some(decl[i..].trim())),
        None => (decl.trim(), None),
    };
    let (inherited_from, name) = match head.split_once('.') {
        Some((r, n)) => (Some(r.trim().to_string()), n.trim().to_string()),
        None => (None, head.to_string()),
    };
    if !is_word(&name) {
        return Err(Error::smpl(format!("invalid metavariable name `{head}`"), lineno));
    }
    if inherited_from.is_some() && tail.is_some() {
        return Err(Error::smpl(
            format!("inherited metavariable `{decl}` cannot carry a constraint"),
            lineno,
        ));
    }

    let mut constraint = None;
    let mut fresh = None;
    if let Some(tail) = tail {
        if let Some(re_src) = tail.strip_prefix("=~") {
            let re_src = unquote(re_src.trim(), lineno)?;
            let re = Regex::new(&re_src).map_err(|e| {
                Error::smpl(format!("invalid regular expression `{re_src}`: {e}"), lineno)
            })?;
            constraint = Some(Constraint::Regex(re));
        } else if kind == MetavarKind::FreshIdentifier {
            let tmpl = tail.strip_prefix('=').unwrap_or(tail).trim();
            fresh = Some(parse_fresh_template(tmpl, lineno)?);
        } else {
            let set_src = tail.strip_prefix('=').unwrap_or(tail).trim();
            let inner = set_src
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| {
                    Error::smpl(format!("expected `{{a,b}}` value set in `{decl}`"), lineno)
                })?;
            let vals: Vec<String> =
                inner.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
            if vals.is_empty() {
                return Err(Error::smpl(format!("empty value set in `{decl}`"), lineno));
            }
            constraint = Some(Constraint::Set(vals));
        }
    }
    if kind == MetavarKind::FreshIdentifier && fresh.is_none() {
        return Err(Error::smpl(
            format!("fresh identifier `{name}` needs a `\"prefix\"##var` template"),
            lineno,
        ));
    }
    Ok(MetavarDecl { name, kind, inherited_from, constraint, fresh, line: lineno })
}

fn parse_fresh_template(s: &str, lineno: u32) -> Result<FreshTemplate, Error> {
    let mut parts = Vec::new();
    for piece in s.split("##") {
        let piece = piece.trim();
        if piece.starts_with('"') {
            parts.push(FreshPart::Lit(unquote(piece, lineno)?));
        } else if is_word(piece) {
            parts.push(FreshPart::Var(piece.to_string()));
        } else {
            return Err(Error::smpl(
                format!("invalid fresh-identifier template part `{piece}`"),
                lineno,
            ));
        }
    }
    Ok(FreshTemplate { parts })
}

fn unquote(s: &str, lineno: u32) -> Result<String, Error> {
    let s = s.trim();
    s.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .map(|s| s.to_string())
        .ok_or_else(|| Error::smpl(format!("expected a string literal, found `{s}`"), lineno))
}

// ----- script rules ------------------------------------------------------------

fn parse_script_decls(lines: &[(u32, &str)]) -> Result<(Vec<ScriptImport>, Vec<String>), Error> {
    let mut imports = Vec::new();
    let mut outputs = Vec::new();
    for &(lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let line = line
            .strip_suffix(';')
            .ok_or_else(|| Error::smpl("script declaration must end with `;`", lineno))?
            .trim();
        if let Some((local, src)) = line.split_once("<<") {
            let local = local.trim().to_string();
            let (rule, name) = src.trim().split_once('.').ok_or_else(|| {
                Error::smpl(format!("expected `rule.name` after `<<` in `{line}`"), lineno)
            })?;
            if !is_word(&local) {
                return Err(Error::smpl(format!("invalid script binding `{local}`"), lineno));
            }
            imports.push(ScriptImport {
                local,
                rule: rule.trim().to_string(),
                name: name.trim().to_string(),
                line: lineno,
            });
        } else if is_word(line) {
            outputs.push(line.to_string());
        } else {
            return Err(Error::smpl(format!("invalid script declaration `{line}`"), lineno));
        }
    }
    Ok((imports, outputs))
}

const SCRIPT_REJECT: &[&str] =
    &["for", "while", "if", "else", "def", "import", "class", "lambda", "with", "try", "return"];

fn parse_script_body(lines: &[String], line0: u32) -> Result<Vec<ScriptStmt>, Error> {
    // Join continuation lines and split on `;`, skipping comment lines.
    let mut logical = String::new();
    let mut stmt_line = line0;
    let mut cur_line = line0;
    let mut stmts = Vec::new();
    for (off, raw) in lines.iter().enumerate() {
        cur_line = line0 + off as u32;
        let t = raw.trim();
        if t.is_empty() || t.starts_with("//") || t.starts_with('#') {
            continue;
        }
        if logical.trim().is_empty() {
            stmt_line = cur_line;
        }
        let t = t.strip_suffix('\\').unwrap_or(t);
        logical.push_str(t);
        logical.push(' ');
        while let Some(semi) = logical.find(';') {
            let stmt: String = logical[..semi].trim().to_string();
            logical = logical[semi + 1..].to_string();
            if !stmt.is_empty() {
                stmts.push(parse_script_stmt(&stmt, stmt_line)?);
            }
            stmt_line = cur_line;
        }
    }
    if !logical.trim().is_empty() {
        return Err(Error::script_subset(
            format!("script statement not terminated by `;`: `{}`", logical.trim()),
            cur_line,
        ));
    }
    Ok(stmts)
}

fn parse_script_stmt(stmt: &str, lineno: u32) -> Result<ScriptStmt, Error> {
    let first_word: String =
        stmt.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
    if SCRIPT_REJECT.contains(&first_word.as_str()) {
        return Err(Error::script_subset(
            format!("`{first_word}` is outside the supported script subset (only `coccinelle.x = ...` assignments are allowed)"),
            lineno,
        ));
    }
    let (lhs, rhs) = stmt.split_once('=').ok_or_else(|| {
        Error::script_subset(format!("expected an assignment, found `{stmt}`"), lineno)
    })?;
    let target = lhs
        .trim()
        .strip_prefix("coccinelle.")
        .ok_or_else(|| {
            Error::script_subset(
                format!("assignment target must be `coccinelle.<name>`, found `{}`", lhs.trim()),
                lineno,
            )
        })?
        .trim()
        .to_string();
    if !is_word(&target) {
        return Err(Error::script_subset(format!("invalid output name `{target}`"), lineno));
    }
    let rhs = rhs.trim();
    let (ctor, inner) = if let Some(rest) = rhs.strip_prefix("cocci.make_ident") {
        (Some(Ctor::MakeIdent), strip_call_parens(rest, lineno)?)
    } else if let Some(rest) = rhs.strip_prefix("cocci.make_type") {
        (Some(Ctor::MakeType), strip_call_parens(rest, lineno)?)
    } else if let Some(rest) = rhs.strip_prefix("cocci.make_pragmainfo") {
        (Some(Ctor::MakePragmaInfo), strip_call_parens(rest, lineno)?)
    } else {
        (None, rhs.to_string())
    };
    let value = parse_script_expr(&inner, lineno)?;
    Ok(ScriptStmt { target, ctor, value, line: lineno })
}

fn strip_call_parens(s: &str, lineno: u32) -> Result<String, Error> {
    let s = s.trim();
    s.strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .map(|s| s.trim().to_string())
        .ok_or_else(|| {
            Error::script_subset(format!("expected `( ... )` after constructor, found `{s}`"), lineno)
        })
}

fn parse_script_expr(s: &str, lineno: u32) -> Result<ScriptExpr, Error> {
    let parts = split_plus(s);
    let mut exprs = Vec::new();
    for part in parts {
        let part = part.trim();
        if part.starts_with('"') {
            exprs.push(ScriptExpr::Str(unquote(part, lineno)?));
        } else if let Some(open) = part.find('[') {
            let table = part[..open].trim();
            let key = part[open + 1..]
                .strip_suffix(']')
                .ok_or_else(|| {
                    Error::script_subset(format!("unterminated table index in `{part}`"), lineno)
                })?
                .trim();
            if !is_word(table) || !is_word(key) {
                return Err(Error::script_subset(
                    format!("table lookups must have the form `TABLE[var]`, found `{part}`"),
                    lineno,
                ));
            }
            exprs.push(ScriptExpr::Index { table: table.to_string(), key: key.to_string() });
        } else if is_word(part) {
            exprs.push(ScriptExpr::Var(part.to_string()));
        } else {
            return Err(Error::script_subset(
                format!("unsupported script expression `{part}`"),
                lineno,
            ));
        }
    }
    if exprs.is_empty() {
        return Err(Error::script_subset("empty script expression", lineno));
    }
    Ok(if exprs.len() == 1 { exprs.pop().unwrap() } else { ScriptExpr::Concat(exprs) })
}

/// Splits on `+` outside string literals.
fn split_plus(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut in_str = false;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '+' if !in_str => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

// ----- initializer rules --------------------------------------------------------

fn parse_init_body(lines: &[String], line0: u32) -> Result<Vec<(String, Vec<(String, String)>)>, Error> {
    let mut text = String::new();
    for raw in lines {
        let t = raw.trim();
        if t.starts_with("//") || t.starts_with('#') {
            continue;
        }
        text.push_str(raw);
        text.push('\n');
    }
    let mut tables = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let eq = rest.find('=').ok_or_else(|| {
            Error::script_subset(
                format!("expected `NAME = {{ ... }}` table definition, found `{}`", head_of(rest)),
                line0,
            )
        })?;
        let name = rest[..eq].trim().to_string();
        if !is_word(&name) {
            return Err(Error::script_subset(format!("invalid table name `{name}`"), line0));
        }
        let after = rest[eq + 1..].trim_start();
        let body = after.strip_prefix('{').ok_or_else(|| {
            Error::script_subset(format!("expected `{{` after `{name} =`"), line0)
        })?;
        let close = body.find('}').ok_or_else(|| {
            Error::script_subset(format!("unterminated table `{name}`"), line0)
        })?;
        let mut entries = Vec::new();
        for pair in split_top_commas(&body[..close]) {
            let pair = pair.trim();
            if pair.is_empty() {
                continue;
            }
            let (k, v) = pair.split_once(':').ok_or_else(|| {
                Error::script_subset(format!("expected `\"k\": \"v\"` entry, found `{pair}`"), line0)
            })?;
            entries.push((unquote(k, line0)?, unquote(v, line0)?));
        }
        tables.push((name, entries));
        rest = body[close + 1..].trim();
    }
    Ok(tables)
}

fn head_of(s: &str) -> String {
    s.chars().take(30).collect()
}

// ----- pattern bodies -----------------------------------------------------------

/// Interleaved body stream: pattern tokens and group markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BTok {
    Tok(PTokId),
    Open,
    Or,
    And,
    Close,
}

struct BodyStream {
    items: Vec<BTok>,
    tokens: Vec<PTok>,
    chunks: Vec<PlusChunk>,
}

pub fn compile_pattern_body(
    lines: &[String],
    line0: u32,
    metavars: &[MetavarDecl],
) -> Result<PatternBody, Error> {
    let stream = tokenize_body(lines, line0)?;
    let mut p = PatParser {
        items: &stream.items,
        tokens: &stream.tokens,
        pos: 0,
        metavars,
        line0,
    };
    let shape = p.parse_shape()?;
    let mut raw: Vec<String> = lines.to_vec();
    while raw.last().map(|l| l.trim().is_empty()).unwrap_or(false) {
        raw.pop();
    }
    Ok(PatternBody { tokens: stream.tokens, chunks: stream.chunks, shape, raw })
}

fn tokenize_body(lines: &[String], line0: u32) -> Result<BodyStream, Error> {
    let mut items = Vec::new();
    let mut tokens: Vec<PTok> = Vec::new();
    let mut chunks: Vec<PlusChunk> = Vec::new();
    let mut open_chunk: Option<PlusChunk> = None;
    // whether the most recent non-plus content ended with a minus token
    let mut last_was_minus = false;

    for (li, raw) in lines.iter().enumerate() {
        let lineno = line0 + li as u32;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        // group-marker lines carry the marker in the first column, which is
        // what separates them from pattern lines that happen to hold a lone
        // bracket (e.g. a split for-header's `)`)
        let first = raw.as_bytes()[0];
        if matches!(first, b'(' | b'|' | b'&' | b')') && raw[1..].trim().is_empty() {
            if let Some(c) = open_chunk.take() {
                chunks.push(c);
            }
            items.push(match first {
                b'(' => BTok::Open,
                b'|' => BTok::Or,
                b'&' => BTok::And,
                _ => BTok::Close,
            });
            last_was_minus = false;
            continue;
        }
        let (ann, content) = match raw.chars().next() {
            Some('-') => ('-', strip_one_space(&raw[1..])),
            Some('+') => ('+', strip_one_space(&raw[1..])),
            _ => (' ', raw.as_str()),
        };
        if ann == '+' {
            let chunk = open_chunk.get_or_insert_with(|| PlusChunk {
                lines: Vec::new(),
                at: tokens.len(),
                attach: if last_was_minus { Attach::Replace } else { Attach::Insert },
            });
            chunk.lines.push(content.to_string());
            continue;
        }
        if let Some(c) = open_chunk.take() {
            chunks.push(c);
        }
        lex_pattern_line(content, ann == '-', li, lineno, &mut items, &mut tokens)?;
        last_was_minus = ann == '-' && matches!(items.last(), Some(BTok::Tok(_)));
    }
    if let Some(c) = open_chunk.take() {
        chunks.push(c);
    }
    Ok(BodyStream { items, tokens, chunks })
}

/// Strips at most one leading space (the conventional gap after `-`/`+`).
fn strip_one_space(s: &str) -> &str {
    s.strip_prefix(' ').unwrap_or(s)
}

fn lex_pattern_line(
    content: &str,
    minus: bool,
    line_idx: usize,
    lineno: u32,
    items: &mut Vec<BTok>,
    tokens: &mut Vec<PTok>,
) -> Result<(), Error> {
    let toks = lex(content.as_bytes());
    let mut i = 0usize;
    while i < toks.len() {
        let t = toks[i];
        if t.kind.is_trivia() {
            i += 1;
            continue;
        }
        let text = t.text(content.as_bytes());
        if text == b"\\" {
            // inline group marker `\(`, `\|`, `\&`, `\)`
            let next = toks.get(i + 1);
            let marker = next.and_then(|n| {
                if n.start != t.end {
                    return None;
                }
                match n.text(content.as_bytes()) {
                    b"(" => Some(BTok::Open),
                    b"|" => Some(BTok::Or),
                    b"&" => Some(BTok::And),
                    b")" => Some(BTok::Close),
                    _ => None,
                }
            });
            let Some(m) = marker else {
                return Err(Error::smpl("stray `\\` in pattern", lineno));
            };
            items.push(m);
            i += 2;
            continue;
        }
        tokens.push(PTok {
            text: String::from_utf8_lossy(text).into_owned(),
            minus,
            line: line_idx,
        });
        items.push(BTok::Tok(tokens.len() - 1));
        i += 1;
    }
    Ok(())
}

// ----- pattern parser ------------------------------------------------------------

struct PatParser<'a> {
    items: &'a [BTok],
    tokens: &'a [PTok],
    pos: usize,
    metavars: &'a [MetavarDecl],
    line0: u32,
}

impl<'a> PatParser<'a> {
    fn kind_of(&self, word: &str) -> Option<MetavarKind> {
        self.metavars.iter().find(|m| m.name == word).map(|m| m.kind)
    }

    fn peek(&self) -> Option<BTok> {
        self.items.get(self.pos).copied()
    }

    fn peek_tok(&self) -> Option<&'a PTok> {
        match self.peek() {
            Some(BTok::Tok(id)) => Some(&self.tokens[id]),
            _ => None,
        }
    }

    fn peek_text(&self) -> &'a str {
        self.peek_tok().map(|t| t.text.as_str()).unwrap_or("")
    }

    fn peek_text_at(&self, n: usize) -> &'a str {
        match self.items.get(self.pos + n) {
            Some(BTok::Tok(id)) => self.tokens[*id].text.as_str(),
            _ => "",
        }
    }

    fn bump(&mut self) -> PTokId {
        let BTok::Tok(id) = self.items[self.pos] else { unreachable!("bump on marker") };
        self.pos += 1;
        id
    }

    fn eat(&mut self, text: &str) -> Option<PTokId> {
        if self.peek_text() == text {
            Some(self.bump())
        } else {
            None
        }
    }

    fn expect(&mut self, text: &str) -> Result<PTokId, Error> {
        self.eat(text).ok_or_else(|| self.err(&format!("expected `{text}`")))
    }

    fn err(&self, message: &str) -> Error {
        let (found, line) = match self.peek() {
            Some(BTok::Tok(id)) => {
                let t = &self.tokens[id];
                (format!("`{}`", t.text), self.line0 + t.line as u32)
            }
            Some(BTok::Open) => ("`(` group marker".to_string(), self.line0),
            Some(BTok::Or) => ("`|` group marker".to_string(), self.line0),
            Some(BTok::And) => ("`&` group marker".to_string(), self.line0),
            Some(BTok::Close) => ("`)` group marker".to_string(), self.line0),
            None => ("end of pattern".to_string(), self.line0),
        };
        Error::smpl(format!("{message}, found {found}"), line)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.items.len()
    }

    fn parse_shape(&mut self) -> Result<BodyShape, Error> {
        if self.at_end() {
            return Ok(BodyShape::Stmts(Vec::new()));
        }
        let save = self.pos;
        match self.parse_stmt_seq(true) {
            Ok(stmts) if self.at_end() => return Ok(BodyShape::Stmts(stmts)),
            _ => {}
        }
        self.pos = save;
        let expr = self.parse_expr()?;
        if !self.at_end() {
            return Err(self.err("trailing tokens after expression pattern"));
        }
        Ok(BodyShape::Expr(expr))
    }

    /// Parses statement elements until end of stream or a group delimiter.
    fn parse_stmt_seq(&mut self, top: bool) -> Result<Vec<PStmt>, Error> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => break,
                Some(BTok::Or) | Some(BTok::And) | Some(BTok::Close) => break,
                Some(BTok::Open) => out.push(self.parse_group()?),
                Some(BTok::Tok(_)) => {
                    if !top && self.peek_text() == "}" {
                        break;
                    }
                    out.push(self.parse_stmt()?);
                }
            }
        }
        Ok(out)
    }

    fn parse_group(&mut self) -> Result<PStmt, Error> {
        let t0 = self.tokens.len().min(self.next_tok_id());
        self.pos += 1; // Open
        let mut branches = Vec::new();
        let mut kind: Option<GroupKind> = None;
        loop {
            branches.push(self.parse_branch()?);
            match self.peek() {
                Some(BTok::Or) => {
                    if kind == Some(GroupKind::Conjunction) {
                        return Err(self.err("cannot mix `|` and `&` in one group"));
                    }
                    kind = Some(GroupKind::Disjunction);
                    self.pos += 1;
                }
                Some(BTok::And) => {
                    if kind == Some(GroupKind::Disjunction) {
                        return Err(self.err("cannot mix `|` and `&` in one group"));
                    }
                    kind = Some(GroupKind::Conjunction);
                    self.pos += 1;
                }
                Some(BTok::Close) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected `|`, `&`, or `)` in group")),
            }
        }
        let t1 = self.prev_tok_id();
        Ok(PStmt::Group(PGroup {
            kind: kind.unwrap_or(GroupKind::Disjunction),
            branches,
            t0,
            t1,
        }))
    }

    /// Token id of the next pattern token at or after the cursor.
    fn next_tok_id(&self) -> PTokId {
        self.items[self.pos..]
            .iter()
            .find_map(|b| match b {
                BTok::Tok(id) => Some(*id),
                _ => None,
            })
            .unwrap_or(self.tokens.len().saturating_sub(1))
    }

    /// Token id of the last pattern token before the cursor.
    fn prev_tok_id(&self) -> PTokId {
        self.items[..self.pos]
            .iter()
            .rev()
            .find_map(|b| match b {
                BTok::Tok(id) => Some(*id),
                _ => None,
            })
            .unwrap_or(0)
    }

    fn parse_branch(&mut self) -> Result<PBranch, Error> {
        let save = self.pos;
        if let Ok(stmts) = self.parse_stmt_seq(false) {
            if !stmts.is_empty()
                && matches!(self.peek(), Some(BTok::Or) | Some(BTok::And) | Some(BTok::Close))
            {
                return Ok(PBranch::Stmts(stmts));
            }
        }
        self.pos = save;
        let expr = self.parse_expr()?;
        if !matches!(self.peek(), Some(BTok::Or) | Some(BTok::And) | Some(BTok::Close)) {
            return Err(self.err("group branch must end at `|`, `&`, or `)`"));
        }
        Ok(PBranch::Contains(expr))
    }

    fn parse_stmt(&mut self) -> Result<PStmt, Error> {
        let Some(tok) = self.peek_tok() else {
            return Err(self.err("expected a statement pattern"));
        };
        let text = tok.text.clone();
        if text == "..." {
            let tok = self.bump();
            return Ok(PStmt::Dots { tok });
        }
        if text.starts_with('#') {
            return self.parse_directive();
        }
        match text.as_str() {
            "{" => return self.parse_compound(),
            "for" => return self.parse_for(),
            "if" => return self.parse_if(),
            "while" => {
                let t0 = self.bump();
                self.expect("(")?;
                let cond = self.parse_expr()?;
                self.expect(")")?;
                let body = Box::new(self.parse_stmt()?);
                let t1 = body.tok_range().1;
                return Ok(PStmt::While { cond, body, t0, t1 });
            }
            "return" => {
                let t0 = self.bump();
                let value =
                    if self.peek_text() == ";" { None } else { Some(self.parse_expr()?) };
                let t1 = self.expect(";")?;
                return Ok(PStmt::Return { value, t0, t1 });
            }
            "break" => {
                let t0 = self.bump();
                let t1 = self.expect(";")?;
                return Ok(PStmt::Break { t0, t1 });
            }
            _ => {}
        }
        if text == "__attribute__" || self.fn_def_ahead() {
            return self.parse_fn_def();
        }
        // statement / statement-list metavariable
        if is_word(&text) {
            match self.kind_of(&text) {
                Some(MetavarKind::Statement) => {
                    let t0 = self.bump();
                    let mut t1 = t0;
                    let mut pos = None;
                    if self.peek_text() == "@" {
                        self.bump();
                        let p = self.bump();
                        pos = Some(self.tokens[p].text.clone());
                        t1 = p;
                    }
                    return Ok(PStmt::MetaStmt { name: text, pos, t0, t1 });
                }
                Some(MetavarKind::StatementList) => {
                    let t0 = self.bump();
                    return Ok(PStmt::MetaStmtList { name: text, t0, t1: t0 });
                }
                _ => {}
            }
        }
        if let Some(decl) = self.try_parse_decl()? {
            return Ok(decl);
        }
        let expr = self.parse_expr()?;
        let (t0, _) = expr.tok_range();
        let t1 = self.expect(";")?;
        Ok(PStmt::ExprStmt { expr, t0, t1 })
    }

    /// `word word (` begins a function-definition pattern.
    fn fn_def_ahead(&self) -> bool {
        is_word(self.peek_text())
            && is_word(self.peek_text_at(1))
            && self.peek_text_at(2) == "("
    }

    fn parse_directive(&mut self) -> Result<PStmt, Error> {
        let id = self.bump();
        let text = self.tokens[id].text.clone();
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.first() == Some(&"#include") {
            let target = text["#include".len()..].trim().to_string();
            return Ok(PStmt::Include { target, t0: id, t1: id });
        }
        if words.first() == Some(&"#pragma") {
            let mut prefix: Vec<String> = words[1..].iter().map(|w| w.to_string()).collect();
            let tail = match prefix.last().map(|s| s.as_str()) {
                Some("...") => {
                    prefix.pop();
                    PragmaTail::Dots
                }
                Some(w) if self.kind_of(w) == Some(MetavarKind::PragmaInfo) => {
                    let name = prefix.pop().unwrap();
                    PragmaTail::Meta(name)
                }
                _ => PragmaTail::None,
            };
            if prefix.is_empty() {
                return Err(self.err("`#pragma` pattern needs at least one literal word"));
            }
            return Ok(PStmt::Pragma { words: prefix, tail, t0: id, t1: id });
        }
        Err(Error::smpl(
            format!("unsupported directive pattern `{}`", words.first().unwrap_or(&"")),
            self.line0 + self.tokens[id].line as u32,
        ))
    }

    fn parse_compound(&mut self) -> Result<PStmt, Error> {
        let t0 = self.expect("{")?;
        let stmts = self.parse_stmt_seq(false)?;
        let t1 = self.expect("}")?;
        Ok(PStmt::Compound { stmts, t0, t1 })
    }

    fn parse_for(&mut self) -> Result<PStmt, Error> {
        let t0 = self.expect("for")?;
        self.expect("(")?;
        if self.range_for_ahead() {
            return self.parse_range_for(t0);
        }
        let init = self.parse_for_slot(";")?;
        self.expect(";")?;
        let cond = self.parse_for_slot(";")?;
        self.expect(";")?;
        let update = self.parse_for_slot(")")?;
        self.expect(")")?;
        let body = Box::new(self.parse_stmt()?);
        let t1 = body.tok_range().1;
        Ok(PStmt::For { init, cond, update, body, t0, t1 })
    }

    fn parse_for_slot(&mut self, end: &str) -> Result<ForSlot, Error> {
        if self.peek_text() == end {
            return Ok(ForSlot::Empty);
        }
        if self.peek_text() == "..." {
            let tok = self.bump();
            return Ok(ForSlot::Dots { tok });
        }
        // `T i = e` / `T i` declaration form
        if is_word(self.peek_text()) && is_word(self.peek_text_at(1)) {
            let after = self.peek_text_at(2);
            if after == "=" || after == end {
                let t0 = self.next_tok_id();
                let ty = self.parse_word_expr()?;
                let name = self.parse_word_expr()?;
                let mut init = None;
                let mut t1 = name.tok_range().1;
                if self.eat("=").is_some() {
                    let e = self.parse_expr()?;
                    t1 = e.tok_range().1;
                    init = Some(e);
                }
                return Ok(ForSlot::Decl { ty, name, init, t0, t1 });
            }
        }
        Ok(ForSlot::Expr(self.parse_expr()?))
    }

    fn range_for_ahead(&self) -> bool {
        let mut depth = 0usize;
        for item in &self.items[self.pos..] {
            let BTok::Tok(id) = item else { continue };
            match self.tokens[*id].text.as_str() {
                "(" | "[" => depth += 1,
                ")" | "]" => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                ";" if depth == 0 => return false,
                ":" if depth == 0 => return true,
                _ => {}
            }
        }
        false
    }

    fn parse_range_for(&mut self, t0: PTokId) -> Result<PStmt, Error> {
        let ty = self.parse_word_expr()?;
        let byref = self.eat("&").is_some();
        let name = self.parse_word_expr()?;
        self.expect(":")?;
        let iter = self.parse_expr()?;
        self.expect(")")?;
        let body = Box::new(self.parse_stmt()?);
        let t1 = body.tok_range().1;
        Ok(PStmt::RangeFor { ty, byref, name, iter, body, t0, t1 })
    }

    fn parse_if(&mut self) -> Result<PStmt, Error> {
        let t0 = self.expect("if")?;
        self.expect("(")?;
        let cond = self.parse_expr()?;
        self.expect(")")?;
        let then = Box::new(self.parse_stmt()?);
        let t1 = then.tok_range().1;
        Ok(PStmt::If { cond, then, t0, t1 })
    }

    /// `type name ;` / `type name = expr ;` with word or metavar type.
    fn try_parse_decl(&mut self) -> Result<Option<PStmt>, Error> {
        if !(is_word(self.peek_text()) && is_word(self.peek_text_at(1))) {
            return Ok(None);
        }
        let after = self.peek_text_at(2);
        if after != ";" && after != "=" {
            return Ok(None);
        }
        let t0 = self.next_tok_id();
        let ty = self.parse_word_expr()?;
        let name = self.parse_word_expr()?;
        let mut init = None;
        if self.eat("=").is_some() {
            init = Some(self.parse_expr()?);
        }
        let t1 = self.expect(";")?;
        Ok(Some(PStmt::Decl { ty, name, init, t0, t1 }))
    }

    fn parse_fn_def(&mut self) -> Result<PStmt, Error> {
        let t0 = self.next_tok_id();
        let mut attrs = Vec::new();
        while self.peek_text() == "__attribute__" {
            attrs.push(self.parse_attr()?);
        }
        let ret = self.parse_word_expr()?;
        let name = self.parse_word_expr()?;
        self.expect("(")?;
        let params = if self.eat("...").is_some() {
            PParams::Dots
        } else {
            let w = self.peek_text().to_string();
            if self.kind_of(&w) == Some(MetavarKind::ParameterList) {
                self.bump();
                PParams::Meta(w)
            } else {
                return Err(self.err("function pattern parameters must be `...` or a parameter-list metavariable"));
            }
        };
        self.expect(")")?;
        self.expect("{")?;
        let body = self.parse_stmt_seq(false)?;
        let t1 = self.expect("}")?;
        Ok(PStmt::FnDef { attrs, ret, name, params, body, t0, t1 })
    }

    fn parse_attr(&mut self) -> Result<PAttr, Error> {
        let t0 = self.expect("__attribute__")?;
        self.expect("(")?;
        self.expect("(")?;
        let name = self.parse_word_expr()?;
        let mut args = Vec::new();
        if self.eat("(").is_some() {
            args = self.parse_args(")")?;
            self.expect(")")?;
        }
        self.expect(")")?;
        let t1 = self.expect(")")?;
        Ok(PAttr { name, args, t0, t1 })
    }

    fn parse_args(&mut self, end: &str) -> Result<Vec<PArg>, Error> {
        let mut args = Vec::new();
        if self.peek_text() == end && !matches!(self.peek(), Some(BTok::Open)) {
            return Ok(args);
        }
        loop {
            if matches!(self.peek(), Some(BTok::Open)) {
                args.push(PArg::Expr(self.parse_expr()?));
            } else if self.peek_text() == "..." {
                let tok = self.bump();
                args.push(PArg::Dots { tok });
            } else {
                let w = self.peek_text().to_string();
                if is_word(&w) && self.kind_of(&w) == Some(MetavarKind::ExpressionList) {
                    let t0 = self.bump();
                    args.push(PArg::MetaList { name: w, t0 });
                } else {
                    args.push(PArg::Expr(self.parse_expr()?));
                }
            }
            if self.eat(",").is_none() {
                break;
            }
        }
        Ok(args)
    }

    /// A single word (metavariable or literal), with optional `@pos`.
    fn parse_word_expr(&mut self) -> Result<PExpr, Error> {
        let text = self.peek_text().to_string();
        if !is_word(&text) {
            return Err(self.err("expected an identifier or metavariable"));
        }
        let t0 = self.bump();
        let pos = self.parse_pos_suffix()?;
        Ok(self.word_or_metavar(text, pos, t0))
    }

    fn parse_pos_suffix(&mut self) -> Result<Option<String>, Error> {
        if self.peek_text() != "@" {
            return Ok(None);
        }
        self.bump();
        let name = self.peek_text().to_string();
        if !is_word(&name) {
            return Err(self.err("expected a position metavariable after `@`"));
        }
        self.bump();
        Ok(Some(name))
    }

    fn word_or_metavar(&self, text: String, pos: Option<String>, t0: PTokId) -> PExpr {
        match self.kind_of(&text) {
            Some(MetavarKind::Position) | None => PExpr::Word { text, pos, t0 },
            Some(MetavarKind::Symbol) => PExpr::Word { text, pos, t0 },
            Some(_) => PExpr::Metavar { name: text, pos, t0 },
        }
    }

    // --- expressions ---

    fn parse_expr(&mut self) -> Result<PExpr, Error> {
        self.parse_assign_expr()
    }

    fn parse_assign_expr(&mut self) -> Result<PExpr, Error> {
        let lhs = self.parse_binary_expr(1)?;
        let text = self.peek_text();
        if matches!(text, "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=")
        {
            let op = text.to_string();
            self.bump();
            let rhs = self.parse_assign_expr()?;
            let (t0, _) = lhs.tok_range();
            let (_, t1) = rhs.tok_range();
            return Ok(PExpr::Assign { op, lhs: Box::new(lhs), rhs: Box::new(rhs), t0, t1 });
        }
        Ok(lhs)
    }

    fn parse_binary_expr(&mut self, min_prec: u8) -> Result<PExpr, Error> {
        let mut lhs = self.parse_unary_expr()?;
        loop {
            let text = self.peek_text();
            let Some(prec) = bin_prec(text) else { break };
            if prec < min_prec {
                break;
            }
            let op = text.to_string();
            self.bump();
            let rhs = self.parse_binary_expr(prec + 1)?;
            let (t0, _) = lhs.tok_range();
            let (_, t1) = rhs.tok_range();
            lhs = PExpr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), t0, t1 };
        }
        Ok(lhs)
    }

    fn parse_unary_expr(&mut self) -> Result<PExpr, Error> {
        let text = self.peek_text();
        if matches!(text, "+" | "-" | "!" | "~" | "*" | "&" | "++" | "--") {
            let op = text.to_string();
            let t0 = self.bump();
            let operand = self.parse_unary_expr()?;
            let (_, t1) = operand.tok_range();
            return Ok(PExpr::Unary { op, operand: Box::new(operand), t0, t1 });
        }
        self.parse_postfix_expr()
    }

    fn parse_postfix_expr(&mut self) -> Result<PExpr, Error> {
        let mut base = self.parse_primary_expr()?;
        loop {
            if matches!(self.peek(), Some(BTok::Open)) {
                break;
            }
            match self.peek_text() {
                "(" => {
                    self.bump();
                    let args = self.parse_args(")")?;
                    let t1 = self.expect(")")?;
                    let (t0, _) = base.tok_range();
                    base = PExpr::Call { callee: Box::new(base), args, t0, t1 };
                }
                "<<<" => {
                    self.bump();
                    let mut cfg = vec![self.parse_assign_expr()?];
                    while self.eat(",").is_some() {
                        cfg.push(self.parse_assign_expr()?);
                    }
                    if cfg.len() != 4 {
                        return Err(self.err("chevron pattern takes exactly 4 configuration expressions"));
                    }
                    self.expect(">>>")?;
                    self.expect("(")?;
                    let args = self.parse_args(")")?;
                    let t1 = self.expect(")")?;
                    let (t0, _) = base.tok_range();
                    base = PExpr::Chevron { callee: Box::new(base), cfg, args, t0, t1 };
                }
                "[" => {
                    self.bump();
                    let mut idx = vec![self.parse_assign_expr()?];
                    while self.eat(",").is_some() {
                        idx.push(self.parse_assign_expr()?);
                    }
                    let t1 = self.expect("]")?;
                    let (t0, _) = base.tok_range();
                    base = if idx.len() == 1 {
                        PExpr::Subscript {
                            base: Box::new(base),
                            index: Box::new(idx.pop().unwrap()),
                            t0,
                            t1,
                        }
                    } else {
                        PExpr::CommaSubscript { base: Box::new(base), indices: idx, t0, t1 }
                    };
                }
                "." | "->" => {
                    let op = self.peek_text().to_string();
                    self.bump();
                    let name = self.parse_word_expr()?;
                    let (t0, _) = base.tok_range();
                    let (_, t1) = name.tok_range();
                    base = PExpr::Member { op, base: Box::new(base), name: Box::new(name), t0, t1 };
                }
                "++" | "--" => {
                    let op = self.peek_text().to_string();
                    let t1 = self.bump();
                    let (t0, _) = base.tok_range();
                    base = PExpr::Postfix { op, operand: Box::new(base), t0, t1 };
                }
                _ => break,
            }
        }
        Ok(base)
    }

    fn parse_primary_expr(&mut self) -> Result<PExpr, Error> {
        if matches!(self.peek(), Some(BTok::Open)) {
            // expression-position group: disjunction of alternatives
            let t0 = self.next_tok_id();
            self.pos += 1;
            let mut branches = vec![self.parse_expr()?];
            loop {
                match self.peek() {
                    Some(BTok::Or) => {
                        self.pos += 1;
                        branches.push(self.parse_expr()?);
                    }
                    Some(BTok::Close) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected `|` or `)` in expression alternatives")),
                }
            }
            let t1 = self.prev_tok_id();
            return Ok(PExpr::Alt { branches, t0, t1 });
        }
        let Some(tok) = self.peek_tok() else {
            return Err(self.err("expected an expression pattern"));
        };
        let text = tok.text.clone();
        if text == "..." {
            let tok = self.bump();
            return Ok(PExpr::AnyExpr { tok });
        }
        if text == "(" {
            let t0 = self.bump();
            let mut elems = vec![self.parse_assign_expr()?];
            while self.eat(",").is_some() {
                elems.push(self.parse_assign_expr()?);
            }
            let t1 = self.expect(")")?;
            return Ok(PExpr::Paren { elems, t0, t1 });
        }
        let first = text.chars().next().unwrap_or(' ');
        if first.is_ascii_digit() || first == '"' || first == '\'' || (first == '.' && text.len() > 1)
        {
            let t0 = self.bump();
            return Ok(PExpr::Lit { text, t0 });
        }
        if is_word(&text) {
            return self.parse_word_expr();
        }
        Err(self.err("expected an expression pattern"))
    }
}

fn bin_prec(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> RuleSet {
        parse_rules(src).expect("rule file should parse")
    }

    #[test]
    fn anonymous_one_line_header() {
        let rs = parse_ok("@@ @@\n  #include <omp.h>\n+ #include <likwid-marker.h>\n");
        assert_eq!(rs.rules.len(), 1);
        assert_eq!(rs.rules[0].name, "__anon1");
        let p = rs.rules[0].patch().unwrap();
        assert_eq!(p.body.chunks.len(), 1);
        assert!(matches!(p.body.shape, BodyShape::Stmts(ref s) if s.len() == 1));
    }

    #[test]
    fn named_header_with_deps() {
        let rs = parse_ok("@ah depends on rl@\n@@\n  #include <iostream>\n+ #include <algorithm>\n");
        assert_eq!(rs.rules[0].name, "ah");
        assert_eq!(rs.rules[0].deps, vec![Dep::Matched("rl".into())]);
    }

    #[test]
    fn negated_dependency() {
        let rs = parse_ok("@undo depends on !r1@\n@@\n- x;\n");
        assert_eq!(rs.rules[0].deps, vec![Dep::NotMatched("r1".into())]);
    }

    #[test]
    fn metavar_kinds_and_constraints() {
        let rs = parse_ok(concat!(
            "@v@\n",
            "type T;\n",
            "identifier f =~ \"kernel\";\n",
            "identifier c = {i,j};\n",
            "constant k={4};\n",
            "parameter list PL;\n",
            "statement list SL;\n",
            "fresh identifier f512 = \"avx512_\"##f;\n",
            "@@\n",
            "  T f (PL) { SL }\n",
        ));
        let r = &rs.rules[0];
        assert!(matches!(r.metavar("T").unwrap().kind, MetavarKind::Type));
        assert!(matches!(r.metavar("f").unwrap().constraint, Some(Constraint::Regex(_))));
        match &r.metavar("c").unwrap().constraint {
            Some(Constraint::Set(v)) => assert_eq!(v, &vec!["i".to_string(), "j".to_string()]),
            other => panic!("expected set constraint, got {other:?}"),
        }
        let f512 = r.metavar("f512").unwrap();
        assert_eq!(
            f512.fresh.as_ref().unwrap().parts,
            vec![FreshPart::Lit("avx512_".into()), FreshPart::Var("f".into())]
        );
    }

    #[test]
    fn inherited_metavars() {
        let rs = parse_ok("@d@\ntype c.T;\nfunction c.f;\n@@\n  T f (...) { ... }\n");
        let m = rs.rules[0].metavar("T").unwrap();
        assert_eq!(m.inherited_from.as_deref(), Some("c"));
    }

    #[test]
    fn expression_rule_classification() {
        let rs = parse_ok("@m@\nsymbol a;\nexpression x,y,z;\n@@\n- a[x][y][z]\n+ a[x, y, z]\n");
        let p = rs.rules[0].patch().unwrap();
        assert!(matches!(p.body.shape, BodyShape::Expr(_)));
        assert_eq!(p.body.chunks.len(), 1);
        assert_eq!(p.body.chunks[0].attach, Attach::Replace);
    }

    #[test]
    fn statement_rule_classification() {
        let rs = parse_ok("@c@\ntype c_t;\nidentifier i;\n@@\n c_t i;\n");
        let p = rs.rules[0].patch().unwrap();
        match &p.body.shape {
            BodyShape::Stmts(s) => assert!(matches!(s[0], PStmt::Decl { .. })),
            other => panic!("expected statement shape, got {other:?}"),
        }
    }

    #[test]
    fn script_rule_with_table_lookup() {
        let rs = parse_ok(concat!(
            "@script:python cf2hf@\n",
            "fn << cfe.fn;\n",
            "nf;\n",
            "@@\n",
            "coccinelle.nf =\n",
            "  cocci.make_ident(C2HF[fn]);\n",
        ));
        let RuleKind::Script(s) = &rs.rules[0].kind else { panic!("expected script rule") };
        assert_eq!(s.imports.len(), 1);
        assert_eq!(s.outputs, vec!["nf".to_string()]);
        assert_eq!(s.stmts[0].ctor, Some(Ctor::MakeIdent));
        assert_eq!(
            s.stmts[0].value,
            ScriptExpr::Index { table: "C2HF".into(), key: "fn".into() }
        );
    }

    #[test]
    fn script_rule_with_concat_and_space_after_colon() {
        let rs = parse_ok(concat!(
            "@script: python r2@\n",
            "fb << r1.fb;\n",
            "lb;\n",
            "@@\n",
            "coccinelle.lb =\n",
            " \"KOKKOS_LAMBDA(const int i)\" + fb;\n",
        ));
        let RuleKind::Script(s) = &rs.rules[0].kind else { panic!("expected script rule") };
        assert_eq!(
            s.stmts[0].value,
            ScriptExpr::Concat(vec![
                ScriptExpr::Str("KOKKOS_LAMBDA(const int i)".into()),
                ScriptExpr::Var("fb".into())
            ])
        );
    }

    #[test]
    fn script_loop_rejected() {
        let err = parse_rules("@script:python s@\nx << r.x;\n@@\nfor i in x: pass\n").unwrap_err();
        assert!(matches!(err, Error::ScriptSubset { .. }), "got {err:?}");
    }

    #[test]
    fn initializer_table_multiline() {
        let rs = parse_ok(concat!(
            "@initialize:python@ @@\n",
            "C2HF = { \"curand_uniform_double\":\n",
            "         \"rocrand_uniform_double\" }\n",
        ));
        let RuleKind::Initialize(init) = &rs.rules[0].kind else { panic!("expected init rule") };
        assert_eq!(init.tables[0].0, "C2HF");
        assert_eq!(
            init.tables[0].1,
            vec![("curand_uniform_double".to_string(), "rocrand_uniform_double".to_string())]
        );
    }

    #[test]
    fn dialect_hints_collected() {
        let rs = parse_ok("# spatch --c++=23\n@m@\nsymbol a;\nexpression x;\n@@\n- a[x]\n+ a\n");
        assert_eq!(rs.dialect_hints, vec!["--c++=23".to_string()]);
        let rs2 = parse_ok("#spatch --c++\n@m@\nexpression x;\n@@\n- f(x)\n+ g(x)\n");
        assert_eq!(rs2.dialect_hints, vec!["--c++".to_string()]);
    }

    #[test]
    fn column_zero_disjunction_group() {
        let rs = parse_ok(concat!(
            "@c@\n",
            "type T;\n",
            "function f;\n",
            "parameter list PL;\n",
            "@@\n",
            "- __attribute__((target(\n",
            "(\n",
            "- \"avx512\"\n",
            "|\n",
            "- \"avx2\"\n",
            ")\n",
            "- )))\n",
            "- T f(PL) { ... }\n",
        ));
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Stmts(stmts) = &p.body.shape else { panic!("expected stmts") };
        let PStmt::FnDef { attrs, .. } = &stmts[0] else { panic!("expected fn pattern") };
        assert_eq!(attrs.len(), 1);
        let PArg::Expr(PExpr::Alt { branches, .. }) = &attrs[0].args[0] else {
            panic!("expected alternatives in attribute argument")
        };
        assert_eq!(branches.len(), 2);
    }

    #[test]
    fn conjunction_with_containment() {
        let rs = parse_ok(concat!(
            "@p0@\n",
            "type T;\n",
            "identifier i,l;\n",
            "constant k={4};\n",
            "statement A,B,C,D;\n",
            "@@\n",
            "  for (T i=0; i\n",
            "-              +k-1\n",
            "                    < l ;\n",
            "-                         i+=k\n",
            "+                         ++i\n",
            "                              )\n",
            "{\n",
            "  \\( A \\& i+0 \\) \\(\n",
            "- B \\& i+1\n",
            "  \\)\n",
            "}\n",
        ));
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Stmts(stmts) = &p.body.shape else { panic!("expected stmts") };
        let PStmt::For { cond, update, body, .. } = &stmts[0] else { panic!("expected for") };
        assert!(matches!(cond, ForSlot::Expr(_)));
        assert!(matches!(update, ForSlot::Expr(_)));
        let PStmt::Compound { stmts: inner, .. } = body.as_ref() else { panic!("expected block") };
        let PStmt::Group(g) = &inner[0] else { panic!("expected group") };
        assert_eq!(g.kind, GroupKind::Conjunction);
        assert!(matches!(g.branches[0], PBranch::Stmts(_)));
        assert!(matches!(g.branches[1], PBranch::Contains(_)));
        // `++i` replaces the `i+=k` run; the `+k-1` run is a plain deletion
        assert_eq!(p.body.chunks.len(), 1);
        assert_eq!(p.body.chunks[0].attach, Attach::Replace);
    }

    #[test]
    fn pragma_pattern_tails() {
        let rs = parse_ok("@@ @@\n #pragma omp ...\n {\n ...\n }\n");
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Stmts(stmts) = &p.body.shape else { panic!() };
        let PStmt::Pragma { words, tail, .. } = &stmts[0] else { panic!("expected pragma") };
        assert_eq!(words, &vec!["omp".to_string()]);
        assert!(matches!(tail, PragmaTail::Dots));

        let rs2 = parse_ok("@moa@\npragmainfo pi;\n@@\n  #pragma acc pi\n");
        let p2 = rs2.rules[0].patch().unwrap();
        let BodyShape::Stmts(stmts2) = &p2.body.shape else { panic!() };
        let PStmt::Pragma { tail, .. } = &stmts2[0] else { panic!("expected pragma") };
        assert!(matches!(tail, PragmaTail::Meta(ref m) if m == "pi"));
    }

    #[test]
    fn chevron_pattern() {
        let rs = parse_ok(concat!(
            "#spatch --c++\n",
            "@@\n",
            "identifier k;\n",
            "expression b,t,x,y;\n",
            "expression list el;\n",
            "@@\n",
            "- k<<<b,t,x,y>>>(el)\n",
            "+ hipLaunchKernelGGL(k,b,t,x,y,el)\n",
        ));
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Expr(PExpr::Chevron { cfg, args, .. }) = &p.body.shape else {
            panic!("expected chevron expression rule")
        };
        assert_eq!(cfg.len(), 4);
        assert!(matches!(args[0], PArg::MetaList { .. }));
    }

    #[test]
    fn position_suffix_on_call_pattern() {
        let rs = parse_ok("@cfe@\nidentifier fn;\nexpression list el;\nposition p;\n@@\n fn@p(el)\n");
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Expr(PExpr::Call { callee, .. }) = &p.body.shape else {
            panic!("expected call rule")
        };
        let PExpr::Metavar { name, pos, .. } = callee.as_ref() else { panic!("expected metavar") };
        assert_eq!(name, "fn");
        assert_eq!(pos.as_deref(), Some("p"));
    }

    #[test]
    fn statement_metavar_with_position_in_group() {
        let rs = parse_ok(concat!(
            "@r1@\n",
            "statement fb, fc;\n",
            "expression n;\n",
            "identifier c = {i,j};\n",
            "position p;\n",
            "@@\n",
            "(\n",
            "  fc@p\n",
            "&\n",
            "  for (...;c<n;...) fb\n",
            ")\n",
        ));
        let p = rs.rules[0].patch().unwrap();
        let BodyShape::Stmts(stmts) = &p.body.shape else { panic!() };
        let PStmt::Group(g) = &stmts[0] else { panic!("expected group") };
        assert_eq!(g.kind, GroupKind::Conjunction);
        let PBranch::Stmts(b0) = &g.branches[0] else { panic!() };
        assert!(
            matches!(&b0[0], PStmt::MetaStmt { name, pos, .. } if name == "fc" && pos.as_deref() == Some("p"))
        );
        let PBranch::Stmts(b1) = &g.branches[1] else { panic!("for branch should be stmts") };
        assert!(matches!(b1[0], PStmt::For { .. }));
    }

    #[test]
    fn insert_only_function_pattern() {
        let rs = parse_ok(concat!(
            "@pragma_inject@\n",
            "identifier i =~ \"rsb__\";\n",
            "type T;\n",
            "@@\n",
            "+ #pragma GCC push_options\n",
            "T i(...)\n",
            "{\n",
            " ...\n",
            "}\n",
            "+ #pragma GCC pop_options\n",
        ));
        let p = rs.rules[0].patch().unwrap();
        assert_eq!(p.body.chunks.len(), 2);
        assert_eq!(p.body.chunks[0].at, 0);
        assert_eq!(p.body.chunks[0].attach, Attach::Insert);
        assert_eq!(p.body.chunks[1].at, p.body.tokens.len());
        assert_eq!(p.body.chunks[1].attach, Attach::Insert);
    }
}
