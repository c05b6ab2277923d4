//! Error, warning, and diagnostic types shared by every stage.

use std::fmt;

use thiserror::Error;

/// A byte offset plus human-oriented line/column, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourcePosition {
    pub file: String,
    pub offset: usize,
    pub line: u32,
    pub col: u32,
}

impl SourcePosition {
    /// Computes line/column for a byte offset in `src`.
    pub fn at(file: &str, src: &[u8], offset: usize) -> Self {
        let mut line = 1u32;
        let mut col = 1u32;
        for &b in &src[..offset.min(src.len())] {
            if b == b'\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        SourcePosition { file: file.to_string(), offset, line, col }
    }
}

impl fmt::Display for SourcePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Hard failures. Matching never errors; parsing and substitution do.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {message}")]
    CSyntax { message: String, pos: SourcePosition },

    #[error("semantic patch error at line {line}: {message}")]
    Smpl { message: String, line: u32 },

    #[error("script subset violation at line {line}: {message}")]
    ScriptSubset { message: String, line: u32 },

    #[error("rule {rule}: script error: {message}")]
    Script { rule: String, message: String },

    #[error("rule {rule}: plus text references unbound metavariable `{metavar}`")]
    Substitution { rule: String, metavar: String },

    #[error("rule {rule}: transformed source no longer parses: {inner}")]
    PostTransformParse { rule: String, inner: Box<Error> },

    #[error("rule set failed validation: {0:?}")]
    InvalidRuleSet(Vec<Diagnostic>),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn c_syntax(message: impl Into<String>, file: &str, src: &[u8], offset: usize) -> Self {
        Error::CSyntax { message: message.into(), pos: SourcePosition::at(file, src, offset) }
    }

    pub fn smpl(message: impl Into<String>, line: u32) -> Self {
        Error::Smpl { message: message.into(), line }
    }

    pub fn script_subset(message: impl Into<String>, line: u32) -> Self {
        Error::ScriptSubset { message: message.into(), line }
    }
}

/// Non-fatal events surfaced to callers (the CLI prints them to stderr).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// A script rule looked up a key that its table does not contain; the
    /// affected match was dropped.
    ScriptTableMiss { rule: String, table: String, key: String },
    /// An edit overlapped one planned by an earlier match and was dropped.
    OverlappingEdit { rule: String, offset: usize },
    /// A target file was skipped because it does not parse.
    SkippedFile { path: String, reason: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ScriptTableMiss { rule, table, key } => {
                write!(f, "rule {rule}: no entry for `{key}` in table {table}; match dropped")
            }
            Warning::OverlappingEdit { rule, offset } => {
                write!(f, "rule {rule}: edit at byte {offset} overlaps an earlier edit; dropped")
            }
            Warning::SkippedFile { path, reason } => {
                write!(f, "skipping {path}: {reason}")
            }
        }
    }
}

/// A validation finding for a rule set (never fatal by itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}
