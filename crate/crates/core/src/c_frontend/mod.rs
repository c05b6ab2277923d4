//! Lexer, arena syntax tree, and parser for the supported C subset.
//!
//! The lexer is lossless (every byte belongs to exactly one token) and the
//! tree stores token ranges instead of re-printed text, so any node maps back
//! to an exact byte span of the original source.

pub mod ast;
pub mod lexer;
pub mod parser;

pub use ast::{same_structure, Node, NodeId, NodeKind, SyntaxTree, NO_TOK};
pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse, parse_expr_fragment, parse_stmt_fragment, unparse};
