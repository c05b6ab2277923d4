//! Lossless tokenizer. Concatenating all token texts reproduces the input
//! byte-for-byte; there are no lex errors (unrecognized bytes become
//! one-byte punctuators).

/// Token classification. `Comment` and `Whitespace` are trivia; the parser
/// skips them but they keep their place in the token stream so spans and
/// round-tripping stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Punct,
    /// A whole `#pragma ...` (or other non-include directive) line, including
    /// any backslash-newline continuations and the final newline.
    PragmaLine,
    /// A whole `#include ...` line, same absorption rules as `PragmaLine`.
    IncludeLine,
    Comment,
    Whitespace,
}

impl TokenKind {
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Comment | TokenKind::Whitespace)
    }
}

/// A half-open byte range into the source buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, src: &'a [u8]) -> &'a [u8] {
        &src[self.start..self.end]
    }
}

const KEYWORDS: &[&str] = &[
    "auto", "bool", "break", "case", "char", "const", "continue", "default", "do", "double",
    "else", "extern", "false", "float", "for", "if", "inline", "int", "long", "return", "short",
    "signed", "static", "switch", "true", "unsigned", "void", "volatile", "while",
];

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Punctuators, longest first. `<<<`/`>>>` serve the chevron call form;
/// `...` is kept whole for the pattern grammar (plain C never produces it
/// outside varargs, which the subset does not use).
const PUNCTS3: &[&str] = &["<<<", ">>>", "<<=", ">>=", "..."];
const PUNCTS2: &[&str] = &[
    "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "++", "--", "->", "##", "::",
];

/// Tokenizes `src` completely. Never fails.
pub fn lex(src: &[u8]) -> Vec<Token> {
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line_start = 0usize; // start of the current line
    while i < src.len() {
        let b = src[i];
        let start = i;

        // Directive lines: `#` with only whitespace before it on the line.
        if b == b'#' && src[line_start..i].iter().all(|c| *c == b' ' || *c == b'\t') {
            let mut j = i + 1;
            loop {
                if j >= src.len() {
                    break;
                }
                if src[j] == b'\\' && j + 1 < src.len() && src[j + 1] == b'\n' {
                    j += 2; // continuation: keep absorbing
                    continue;
                }
                if src[j] == b'\n' {
                    j += 1; // directive token owns its terminator
                    break;
                }
                j += 1;
            }
            let body = &src[i + 1..j];
            let word_end = body.iter().position(|c| !c.is_ascii_alphanumeric()).unwrap_or(body.len());
            let kind = if &body[..word_end] == b"include" {
                TokenKind::IncludeLine
            } else {
                TokenKind::PragmaLine
            };
            toks.push(Token { kind, start, end: j });
            i = j;
            line_start = j;
            continue;
        }

        if b == b'\n' || b == b' ' || b == b'\t' || b == b'\r' {
            let mut j = i;
            while j < src.len() && matches!(src[j], b'\n' | b' ' | b'\t' | b'\r') {
                if src[j] == b'\n' {
                    line_start = j + 1;
                }
                j += 1;
            }
            toks.push(Token { kind: TokenKind::Whitespace, start, end: j });
            i = j;
            continue;
        }

        if b == b'/' && i + 1 < src.len() && src[i + 1] == b'/' {
            let mut j = i + 2;
            while j < src.len() && src[j] != b'\n' {
                j += 1;
            }
            toks.push(Token { kind: TokenKind::Comment, start, end: j });
            i = j;
            continue;
        }

        if b == b'/' && i + 1 < src.len() && src[i + 1] == b'*' {
            let mut j = i + 2;
            while j + 1 < src.len() && !(src[j] == b'*' && src[j + 1] == b'/') {
                if src[j] == b'\n' {
                    line_start = j + 1;
                }
                j += 1;
            }
            let end = if j + 1 < src.len() { j + 2 } else { src.len() };
            toks.push(Token { kind: TokenKind::Comment, start, end });
            i = end;
            continue;
        }

        if is_ident_start(b) {
            let mut j = i + 1;
            while j < src.len() && is_ident_continue(src[j]) {
                j += 1;
            }
            let text = std::str::from_utf8(&src[i..j]).unwrap_or("");
            let kind = if KEYWORDS.contains(&text) { TokenKind::Keyword } else { TokenKind::Ident };
            toks.push(Token { kind, start, end: j });
            i = j;
            continue;
        }

        if b.is_ascii_digit() || (b == b'.' && i + 1 < src.len() && src[i + 1].is_ascii_digit()) {
            let (end, is_float) = lex_number(src, i);
            let kind = if is_float { TokenKind::FloatLit } else { TokenKind::IntLit };
            toks.push(Token { kind, start, end });
            i = end;
            continue;
        }

        if b == b'"' || b == b'\'' {
            let quote = b;
            let mut j = i + 1;
            while j < src.len() {
                if src[j] == b'\\' && j + 1 < src.len() {
                    j += 2;
                    continue;
                }
                if src[j] == quote {
                    j += 1;
                    break;
                }
                if src[j] == b'\n' {
                    break; // unterminated literal: stop at end of line
                }
                j += 1;
            }
            let kind = if quote == b'"' { TokenKind::StrLit } else { TokenKind::CharLit };
            toks.push(Token { kind, start, end: j });
            i = j;
            continue;
        }

        // Punctuators, longest match first; any leftover byte is a 1-byte punct.
        let rest = &src[i..];
        let mut matched = 1usize;
        for p in PUNCTS3 {
            if rest.starts_with(p.as_bytes()) {
                matched = 3;
                break;
            }
        }
        if matched == 1 {
            for p in PUNCTS2 {
                if rest.starts_with(p.as_bytes()) {
                    matched = 2;
                    break;
                }
            }
        }
        toks.push(Token { kind: TokenKind::Punct, start, end: i + matched });
        i += matched;
    }
    toks
}

fn lex_number(src: &[u8], start: usize) -> (usize, bool) {
    let mut j = start;
    let mut is_float = false;
    if src[j] == b'0' && j + 1 < src.len() && (src[j + 1] | 0x20) == b'x' {
        j += 2;
        while j < src.len() && src[j].is_ascii_hexdigit() {
            j += 1;
        }
    } else {
        while j < src.len() && src[j].is_ascii_digit() {
            j += 1;
        }
        if j < src.len() && src[j] == b'.' {
            is_float = true;
            j += 1;
            while j < src.len() && src[j].is_ascii_digit() {
                j += 1;
            }
        }
        if j < src.len() && (src[j] | 0x20) == b'e' {
            let mut k = j + 1;
            if k < src.len() && (src[k] == b'+' || src[k] == b'-') {
                k += 1;
            }
            if k < src.len() && src[k].is_ascii_digit() {
                is_float = true;
                j = k;
                while j < src.len() && src[j].is_ascii_digit() {
                    j += 1;
                }
            }
        }
    }
    while j < src.len() && matches!(src[j] | 0x20, b'u' | b'l' | b'f') {
        if (src[j] | 0x20) == b'f' {
            is_float = true;
        }
        j += 1;
    }
    (j, is_float)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        lex(src.as_bytes())
            .iter()
            .map(|t| (t.kind, String::from_utf8_lossy(t.text(src.as_bytes())).into_owned()))
            .collect()
    }

    #[test]
    fn decl_tokens() {
        let got = kinds("int x;");
        assert_eq!(
            got,
            vec![
                (TokenKind::Keyword, "int".to_string()),
                (TokenKind::Whitespace, " ".to_string()),
                (TokenKind::Ident, "x".to_string()),
                (TokenKind::Punct, ";".to_string()),
            ]
        );
    }

    #[test]
    fn pragma_line_is_one_token() {
        let got = kinds("#pragma omp unroll partial (4)\n");
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, TokenKind::PragmaLine);
        assert_eq!(got[0].1, "#pragma omp unroll partial (4)\n");
    }

    #[test]
    fn pragma_continuation_is_one_token() {
        let src = "#pragma acc kernels \\\n copy(a)\n";
        let got = kinds(src);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, TokenKind::PragmaLine);
        assert_eq!(got[0].1, src);
    }

    #[test]
    fn include_line_kind() {
        let got = kinds("#include <omp.h>\nint y;\n");
        assert_eq!(got[0].0, TokenKind::IncludeLine);
        assert_eq!(got[0].1, "#include <omp.h>\n");
        assert_eq!(got[1].0, TokenKind::Keyword);
    }

    #[test]
    fn chevron_punctuators() {
        let got = kinds("k<<<b,t>>>");
        assert_eq!(got[1], (TokenKind::Punct, "<<<".to_string()));
        assert_eq!(got[5], (TokenKind::Punct, ">>>".to_string()));
    }

    #[test]
    fn shift_stays_two_chars() {
        let got = kinds("a << b >> c");
        assert!(got.iter().any(|(k, t)| *k == TokenKind::Punct && t == "<<"));
        assert!(got.iter().any(|(k, t)| *k == TokenKind::Punct && t == ">>"));
    }

    #[test]
    fn comments_are_trivia() {
        let got = kinds("x /* a */ = 1; // tail\n");
        assert!(got.iter().any(|(k, t)| *k == TokenKind::Comment && t == "/* a */"));
        assert!(got.iter().any(|(k, t)| *k == TokenKind::Comment && t == "// tail"));
    }

    #[test]
    fn unknown_bytes_become_puncts() {
        let got = lex(&[b'a', 0xE9, b'b']); // stray Latin-1 byte
        assert_eq!(got.len(), 3);
        assert_eq!(got[1].kind, TokenKind::Punct);
    }

    #[test]
    fn round_trip_is_exact() {
        let srcs: &[&str] = &[
            "int x;",
            "#pragma acc kernels \\\n copy(a)\nfor (int i=0; i<n; ++i) a[i] = 0;\n",
            "double f() { return 1.0e-3f; } // done\n",
            "s += x[q] * y[q]; /* inner\nproduct */\n",
            "k<<<g,b,0,s>>>(x,n);\n",
        ];
        for s in srcs {
            let toks = lex(s.as_bytes());
            let mut rebuilt = Vec::new();
            for t in &toks {
                rebuilt.extend_from_slice(t.text(s.as_bytes()));
            }
            assert_eq!(rebuilt, s.as_bytes(), "round-trip failed for {s:?}");
        }
    }

    #[test]
    fn hash_mid_line_is_punct() {
        let got = kinds("a # b");
        assert_eq!(got[2], (TokenKind::Punct, "#".to_string()));
    }
}
