//! Arena syntax tree. Nodes reference token ranges; all text lives in the
//! original source buffer, which is what makes unparse byte-exact.

use super::lexer::{Token, TokenKind};

pub type NodeId = u32;

pub const NO_TOK: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    TranslationUnit,
    IncludeLine,
    PragmaLine,
    /// children: `[AttrList, TypeName, Ident, ParamList, Compound]`
    FnDef,
    AttrList,
    /// children: `[Ident, ArgList]`
    Attr,
    /// Leaf; covers the type-word run plus any `*`/`&` suffixes.
    TypeName,
    /// Leaf; `first_tok..last_tok` spans the parens, `op_tok`/`aux` are the
    /// opening/closing paren token indices.
    ParamList,
    /// children: statements; `op_tok` is the `{` token, `last_tok` the `}`.
    Compound,
    /// children: `[TypeName, Ident]` or `[TypeName, Ident, init-expr]`.
    /// `aux` = 1 when the declarator carries an array suffix.
    DeclStmt,
    ExprStmt,
    /// children: `[init, cond, update, body]`; empty slots are `Empty` nodes.
    For,
    /// children: `[TypeName, Ident, iterable-expr, body]`; `aux` = 1 for `&`.
    RangeFor,
    /// children: `[cond, then]` or `[cond, then, else]`.
    If,
    While,
    Return,
    Break,
    Empty,
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    /// children: `[operand]`; `op_tok` is the operator.
    Unary,
    Postfix,
    /// children: `[lhs, rhs]`; `op_tok` is the operator.
    Binary,
    Assign,
    /// children: `[callee, ArgList]`.
    Call,
    /// children: `[callee, ArgList, Compound]` — a call followed by a braced
    /// block argument (the lambda-macro shape some rewritten code uses).
    CallWithBody,
    /// children: `[callee, cfg0, cfg1, cfg2, cfg3, ArgList]`.
    ChevronCall,
    Subscript,
    /// children: `[base, ArgList]` — `a[i, j, k]`.
    CommaSubscript,
    /// children: `[base, Ident]`; `op_tok` is `.` or `->`.
    Member,
    Paren,
    /// Parenthesized comma list `(e0, e1, ...)`.
    ParenList,
    /// children: argument expressions (or `TypedArg`s); delimiters in
    /// `op_tok`/`aux`.
    ArgList,
    /// Leaf; a declaration-style argument such as `const int i`.
    TypedArg,
}

impl NodeKind {
    pub fn is_expr(self) -> bool {
        matches!(
            self,
            NodeKind::Ident
                | NodeKind::IntLit
                | NodeKind::FloatLit
                | NodeKind::StrLit
                | NodeKind::CharLit
                | NodeKind::Unary
                | NodeKind::Postfix
                | NodeKind::Binary
                | NodeKind::Assign
                | NodeKind::Call
                | NodeKind::CallWithBody
                | NodeKind::ChevronCall
                | NodeKind::Subscript
                | NodeKind::CommaSubscript
                | NodeKind::Member
                | NodeKind::Paren
                | NodeKind::ParenList
        )
    }

    pub fn is_stmt(self) -> bool {
        matches!(
            self,
            NodeKind::IncludeLine
                | NodeKind::PragmaLine
                | NodeKind::FnDef
                | NodeKind::Compound
                | NodeKind::DeclStmt
                | NodeKind::ExprStmt
                | NodeKind::For
                | NodeKind::RangeFor
                | NodeKind::If
                | NodeKind::While
                | NodeKind::Return
                | NodeKind::Break
        )
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub first_tok: u32,
    pub last_tok: u32,
    pub op_tok: u32,
    pub aux: u32,
}

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    pub src: Vec<u8>,
    pub tokens: Vec<Token>,
    pub nodes: Vec<Node>,
    pub root: NodeId,
}

impl SyntaxTree {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    /// Byte span covered by the node's tokens.
    pub fn span(&self, id: NodeId) -> (usize, usize) {
        let n = self.node(id);
        if n.kind == NodeKind::Empty || n.first_tok == NO_TOK {
            let at = if n.first_tok == NO_TOK { 0 } else { self.tokens[n.first_tok as usize].start };
            return (at, at);
        }
        (self.tokens[n.first_tok as usize].start, self.tokens[n.last_tok as usize].end)
    }

    pub fn slice(&self, id: NodeId) -> &[u8] {
        let (a, b) = self.span(id);
        &self.src[a..b]
    }

    pub fn tok_text(&self, tok: u32) -> &[u8] {
        self.tokens[tok as usize].text(&self.src)
    }

    /// Significant (non-trivia) token texts inside the node's range; this is
    /// the structural signature used for whitespace-insensitive equality.
    pub fn sig(&self, id: NodeId) -> Vec<&[u8]> {
        let n = self.node(id);
        if n.kind == NodeKind::Empty || n.first_tok == NO_TOK {
            return Vec::new();
        }
        self.tokens[n.first_tok as usize..=n.last_tok as usize]
            .iter()
            .filter(|t| !t.kind.is_trivia())
            .map(|t| t.text(&self.src))
            .collect()
    }

    /// Text between the parens/brackets recorded in `op_tok`/`aux`, trimmed.
    pub fn interior_slice(&self, id: NodeId) -> &[u8] {
        let n = self.node(id);
        let a = self.tokens[n.op_tok as usize].end;
        let b = self.tokens[n.aux as usize].start;
        trim_bytes(&self.src[a..b])
    }

    /// All statement-list owners (the translation unit plus every compound),
    /// preorder.
    pub fn stmt_lists(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let n = self.node(id);
            if matches!(n.kind, NodeKind::TranslationUnit | NodeKind::Compound) {
                out.push(id);
            }
            for &c in n.children.iter().rev() {
                stack.push(c);
            }
        }
        out.sort_by_key(|&id| self.span(id).0);
        out
    }

    /// Expression nodes under `id` (inclusive), preorder / source order.
    pub fn exprs_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.walk_exprs(id, &mut out);
        out
    }

    fn walk_exprs(&self, id: NodeId, out: &mut Vec<NodeId>) {
        let n = self.node(id);
        if n.kind.is_expr() {
            out.push(id);
        }
        for &c in &n.children {
            self.walk_exprs(c, out);
        }
    }

    /// Every identifier token text in the tree (used for fresh-name checks).
    pub fn ident_texts(&self) -> std::collections::BTreeSet<Vec<u8>> {
        self.tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Ident)
            .map(|t| t.text(&self.src).to_vec())
            .collect()
    }

    /// Start offset of the line containing `offset`.
    pub fn line_start(&self, offset: usize) -> usize {
        self.src[..offset].iter().rposition(|&b| b == b'\n').map(|p| p + 1).unwrap_or(0)
    }

    /// Offset one past the newline ending the line that contains `offset`
    /// (or the end of the buffer).
    pub fn line_end_inclusive(&self, offset: usize) -> usize {
        self.src[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p + 1)
            .unwrap_or(self.src.len())
    }

    /// Leading whitespace of the line containing `offset`.
    pub fn line_indent(&self, offset: usize) -> &[u8] {
        let ls = self.line_start(offset);
        let mut e = ls;
        while e < self.src.len() && (self.src[e] == b' ' || self.src[e] == b'\t') {
            e += 1;
        }
        &self.src[ls..e]
    }
}

pub fn trim_bytes(b: &[u8]) -> &[u8] {
    let start = b.iter().position(|c| !c.is_ascii_whitespace()).unwrap_or(b.len());
    let end = b.iter().rposition(|c| !c.is_ascii_whitespace()).map(|p| p + 1).unwrap_or(start);
    &b[start..end]
}

/// Whitespace-insensitive structural equality between two nodes, possibly in
/// different trees.
pub fn same_structure(a_tree: &SyntaxTree, a: NodeId, b_tree: &SyntaxTree, b: NodeId) -> bool {
    a_tree.sig(a) == b_tree.sig(b)
}
