//! Recursive-descent parser for the supported C subset. Fails fast on the
//! first syntax error with a position; there is no error recovery.
//!
//! Declarations are recognized by lookahead (a run of type words, optional
//! `*`/`&`, a name, then `;`/`=`/`[`), parameter lists are kept as opaque
//! token ranges, and a handful of extension forms are accepted so that
//! rewritten output still parses: chevron calls `k<<<a,b,c,d>>>(...)`,
//! comma subscripts `a[i, j, k]`, parenthesized comma lists `(0, n)`,
//! declaration-style call arguments (`const int i`), and a braced block
//! directly after a call.

use super::ast::{Node, NodeId, NodeKind, SyntaxTree, NO_TOK};
use super::lexer::{lex, Token, TokenKind};
use crate::diagnostics::Error;

/// Parses a whole translation unit.
pub fn parse(src: &[u8], file: &str) -> Result<SyntaxTree, Error> {
    let tokens = lex(src);
    let mut p = Parser { src, file, toks: &tokens, pos: 0, nodes: Vec::new() };
    let root = p.parse_translation_unit()?;
    let nodes = std::mem::take(&mut p.nodes);
    Ok(SyntaxTree { src: src.to_vec(), tokens, nodes, root })
}

/// Returns the source unchanged; the tree never mutates its buffer.
pub fn unparse(tree: &SyntaxTree) -> Vec<u8> {
    tree.src.clone()
}

/// Parses a standalone expression (test/tooling helper).
pub fn parse_expr_fragment(src: &[u8]) -> Result<SyntaxTree, Error> {
    let tokens = lex(src);
    let mut p = Parser { src, file: "<expr>", toks: &tokens, pos: 0, nodes: Vec::new() };
    let root = p.parse_expr()?;
    p.skip_trivia();
    if p.pos < p.toks.len() {
        return Err(p.err_here("trailing tokens after expression"));
    }
    let nodes = std::mem::take(&mut p.nodes);
    Ok(SyntaxTree { src: src.to_vec(), tokens, nodes, root })
}

/// Parses a standalone statement (test/tooling helper).
pub fn parse_stmt_fragment(src: &[u8]) -> Result<SyntaxTree, Error> {
    let tokens = lex(src);
    let mut p = Parser { src, file: "<stmt>", toks: &tokens, pos: 0, nodes: Vec::new() };
    let root = p.parse_stmt()?;
    p.skip_trivia();
    if p.pos < p.toks.len() {
        return Err(p.err_here("trailing tokens after statement"));
    }
    let nodes = std::mem::take(&mut p.nodes);
    Ok(SyntaxTree { src: src.to_vec(), tokens, nodes, root })
}

struct Parser<'a> {
    src: &'a [u8],
    file: &'a str,
    toks: &'a [Token],
    pos: usize,
    nodes: Vec<Node>,
}

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

fn binary_prec(op: &[u8]) -> Option<u8> {
    Some(match op {
        b"||" => 1,
        b"&&" => 2,
        b"|" => 3,
        b"^" => 4,
        b"&" => 5,
        b"==" | b"!=" => 6,
        b"<" | b">" | b"<=" | b">=" => 7,
        b"<<" | b">>" => 8,
        b"+" | b"-" => 9,
        b"*" | b"/" | b"%" => 10,
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn add(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        (self.nodes.len() - 1) as NodeId
    }

    fn skip_trivia(&mut self) {
        while self.pos < self.toks.len() && self.toks[self.pos].kind.is_trivia() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<Token> {
        self.skip_trivia();
        self.toks.get(self.pos).copied()
    }

    fn peek_text(&mut self) -> &'a [u8] {
        self.skip_trivia();
        self.toks.get(self.pos).map(|t| t.text(self.src)).unwrap_or(b"")
    }

    fn bump(&mut self) -> usize {
        self.skip_trivia();
        let i = self.pos;
        self.pos += 1;
        i
    }

    /// Index of the next significant token at or after raw index `i`.
    fn next_sig(&self, mut i: usize) -> usize {
        while i < self.toks.len() && self.toks[i].kind.is_trivia() {
            i += 1;
        }
        i
    }

    fn sig_after(&self, i: usize) -> usize {
        self.next_sig(i + 1)
    }

    fn tok_text(&self, i: usize) -> &'a [u8] {
        self.toks.get(i).map(|t| t.text(self.src)).unwrap_or(b"")
    }

    fn at(&mut self, text: &str) -> bool {
        self.peek_text() == text.as_bytes()
    }

    fn eat(&mut self, text: &str) -> Option<usize> {
        if self.at(text) {
            Some(self.bump())
        } else {
            None
        }
    }

    fn expect(&mut self, text: &str) -> Result<usize, Error> {
        self.eat(text).ok_or_else(|| self.err_here(&format!("expected `{text}`")))
    }

    fn err_here(&self, message: &str) -> Error {
        let i = self.next_sig(self.pos);
        let offset = self.toks.get(i).map(|t| t.start).unwrap_or(self.src.len());
        let found = self
            .toks
            .get(i)
            .map(|t| String::from_utf8_lossy(t.text(self.src)).into_owned())
            .unwrap_or_else(|| "end of input".to_string());
        Error::c_syntax(format!("{message}, found `{found}`"), self.file, self.src, offset)
    }

    // ----- top level -------------------------------------------------------

    fn parse_translation_unit(&mut self) -> Result<NodeId, Error> {
        let mut children = Vec::new();
        loop {
            self.skip_trivia();
            if self.pos >= self.toks.len() {
                break;
            }
            let t = self.toks[self.pos];
            match t.kind {
                TokenKind::IncludeLine => {
                    let i = self.bump();
                    children.push(self.leaf(NodeKind::IncludeLine, i));
                }
                TokenKind::PragmaLine => {
                    let i = self.bump();
                    children.push(self.leaf(NodeKind::PragmaLine, i));
                }
                _ => children.push(self.parse_top_item()?),
            }
        }
        let (first, last) = range_of(&self.nodes, &children);
        Ok(self.add(Node {
            kind: NodeKind::TranslationUnit,
            children,
            first_tok: first,
            last_tok: last,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    fn parse_top_item(&mut self) -> Result<NodeId, Error> {
        let attrs = self.parse_attr_list()?;
        let shape = self
            .decl_lookahead(&[";", "=", "[", "("])
            .ok_or_else(|| self.err_here("expected a declaration or function definition"))?;
        let ty = self.take_type(shape);
        let name = {
            let i = self.bump();
            self.leaf(NodeKind::Ident, i)
        };
        if self.at("(") {
            let params = self.parse_param_list()?;
            if !self.at("{") {
                return Err(self.err_here("expected function body"));
            }
            let body = self.parse_compound()?;
            let first = self
                .nodes[attrs as usize]
                .children
                .first()
                .map(|&c| self.nodes[c as usize].first_tok)
                .unwrap_or(self.nodes[ty as usize].first_tok);
            let last = self.nodes[body as usize].last_tok;
            return Ok(self.add(Node {
                kind: NodeKind::FnDef,
                children: vec![attrs, ty, name, params, body],
                first_tok: first,
                last_tok: last,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        if !self.nodes[attrs as usize].children.is_empty() {
            return Err(self.err_here("attributes are only supported on function definitions"));
        }
        self.finish_decl(ty, name)
    }

    fn parse_attr_list(&mut self) -> Result<NodeId, Error> {
        let mut attrs = Vec::new();
        while self.at("__attribute__") {
            let kw = self.bump();
            self.expect("(")?;
            self.expect("(")?;
            let name = {
                let t = self.peek().ok_or_else(|| self.err_here("expected attribute name"))?;
                if !matches!(t.kind, TokenKind::Ident | TokenKind::Keyword) {
                    return Err(self.err_here("expected attribute name"));
                }
                let i = self.bump();
                self.leaf(NodeKind::Ident, i)
            };
            let args = if self.at("(") {
                self.parse_arg_list_parens()?
            } else {
                self.add(Node {
                    kind: NodeKind::ArgList,
                    children: Vec::new(),
                    first_tok: NO_TOK,
                    last_tok: NO_TOK,
                    op_tok: NO_TOK,
                    aux: 0,
                })
            };
            self.expect(")")?;
            let close = self.expect(")")?;
            attrs.push(self.add(Node {
                kind: NodeKind::Attr,
                children: vec![name, args],
                first_tok: kw as u32,
                last_tok: close as u32,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        let (first, last) = range_of(&self.nodes, &attrs);
        Ok(self.add(Node {
            kind: NodeKind::AttrList,
            children: attrs,
            first_tok: first,
            last_tok: last,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    /// Lookahead for `type-words [*|&]* name <terminator>`. Returns the raw
    /// token indices `(type_first, type_last, name)` without consuming.
    fn decl_lookahead(&mut self, terminators: &[&str]) -> Option<(usize, usize, usize)> {
        self.skip_trivia();
        let mut idx = self.pos;
        let mut words = Vec::new();
        while idx < self.toks.len()
            && matches!(self.toks[idx].kind, TokenKind::Ident | TokenKind::Keyword)
        {
            words.push(idx);
            idx = self.sig_after(idx);
        }
        let mut stars_last = None;
        while idx < self.toks.len() && matches!(self.tok_text(idx), b"*" | b"&") {
            stars_last = Some(idx);
            idx = self.sig_after(idx);
        }
        if let Some(star_end) = stars_last {
            // `double *p` — all words plus the stars form the type.
            if words.is_empty() || idx >= self.toks.len() || self.toks[idx].kind != TokenKind::Ident
            {
                return None;
            }
            let name = idx;
            let after = self.sig_after(idx);
            let after_text = self.tok_text(after);
            if terminators.iter().any(|t| t.as_bytes() == after_text) {
                return Some((words[0], star_end, name));
            }
            return None;
        }
        // `unsigned int x` — the final word is the declarator name.
        if words.len() < 2 {
            return None;
        }
        let name = *words.last().unwrap();
        if self.toks[name].kind != TokenKind::Ident {
            return None;
        }
        let after_text = self.tok_text(idx);
        if terminators.iter().any(|t| t.as_bytes() == after_text) {
            let type_last = words[words.len() - 2];
            return Some((words[0], type_last, name));
        }
        None
    }

    /// Consumes the type tokens identified by `decl_lookahead` and builds a
    /// `TypeName` leaf, leaving the cursor on the declarator name.
    fn take_type(&mut self, shape: (usize, usize, usize)) -> NodeId {
        let (first, last, name) = shape;
        self.pos = name; // tokens between first..=last are covered by the leaf
        self.add(Node {
            kind: NodeKind::TypeName,
            children: Vec::new(),
            first_tok: first as u32,
            last_tok: last as u32,
            op_tok: NO_TOK,
            aux: 0,
        })
    }

    fn finish_decl(&mut self, ty: NodeId, name: NodeId) -> Result<NodeId, Error> {
        let mut aux = 0;
        while self.at("[") {
            aux = 1;
            self.bump();
            let mut depth = 1;
            while depth > 0 {
                let t = self.peek_text();
                if t.is_empty() {
                    return Err(self.err_here("unterminated array suffix"));
                }
                if t == b"[" {
                    depth += 1;
                } else if t == b"]" {
                    depth -= 1;
                }
                self.bump();
            }
        }
        let mut children = vec![ty, name];
        if self.eat("=").is_some() {
            children.push(self.parse_assign()?);
        }
        let semi = self.expect(";")?;
        let first = self.nodes[ty as usize].first_tok;
        Ok(self.add(Node {
            kind: NodeKind::DeclStmt,
            children,
            first_tok: first,
            last_tok: semi as u32,
            op_tok: NO_TOK,
            aux,
        }))
    }

    fn parse_param_list(&mut self) -> Result<NodeId, Error> {
        let open = self.expect("(")?;
        let mut depth = 1usize;
        let mut close = open;
        while depth > 0 {
            self.skip_trivia();
            if self.pos >= self.toks.len() {
                return Err(self.err_here("unterminated parameter list"));
            }
            let t = self.tok_text(self.pos);
            if t == b"(" {
                depth += 1;
            } else if t == b")" {
                depth -= 1;
                close = self.pos;
            }
            self.pos += 1;
        }
        Ok(self.add(Node {
            kind: NodeKind::ParamList,
            children: Vec::new(),
            first_tok: open as u32,
            last_tok: close as u32,
            op_tok: open as u32,
            aux: close as u32,
        }))
    }

    // ----- statements ------------------------------------------------------

    fn parse_compound(&mut self) -> Result<NodeId, Error> {
        let open = self.expect("{")?;
        let mut children = Vec::new();
        loop {
            self.skip_trivia();
            if self.pos >= self.toks.len() {
                return Err(self.err_here("unterminated block"));
            }
            if self.at("}") {
                break;
            }
            children.push(self.parse_stmt()?);
        }
        let close = self.expect("}")?;
        Ok(self.add(Node {
            kind: NodeKind::Compound,
            children,
            first_tok: open as u32,
            last_tok: close as u32,
            op_tok: open as u32,
            aux: 0,
        }))
    }

    fn parse_stmt(&mut self) -> Result<NodeId, Error> {
        self.skip_trivia();
        let Some(t) = self.toks.get(self.pos) else {
            return Err(self.err_here("expected statement"));
        };
        match t.kind {
            TokenKind::PragmaLine => {
                let i = self.bump();
                return Ok(self.leaf(NodeKind::PragmaLine, i));
            }
            TokenKind::IncludeLine => {
                return Err(self.err_here("#include is only allowed at top level"));
            }
            _ => {}
        }
        if self.at("{") {
            return self.parse_compound();
        }
        if self.at("for") {
            return self.parse_for();
        }
        if self.at("if") {
            return self.parse_if();
        }
        if self.at("while") {
            let kw = self.bump();
            self.expect("(")?;
            let cond = self.parse_expr()?;
            self.expect(")")?;
            let body = self.parse_stmt()?;
            let last = self.nodes[body as usize].last_tok;
            return Ok(self.add(Node {
                kind: NodeKind::While,
                children: vec![cond, body],
                first_tok: kw as u32,
                last_tok: last,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        if self.at("return") {
            let kw = self.bump();
            let mut children = Vec::new();
            if !self.at(";") {
                children.push(self.parse_expr()?);
            }
            let semi = self.expect(";")?;
            return Ok(self.add(Node {
                kind: NodeKind::Return,
                children,
                first_tok: kw as u32,
                last_tok: semi as u32,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        if self.at("break") {
            let kw = self.bump();
            let semi = self.expect(";")?;
            return Ok(self.add(Node {
                kind: NodeKind::Break,
                children: Vec::new(),
                first_tok: kw as u32,
                last_tok: semi as u32,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        if let Some(shape) = self.decl_lookahead(&[";", "=", "["]) {
            let ty = self.take_type(shape);
            let name = {
                let i = self.bump();
                self.leaf(NodeKind::Ident, i)
            };
            return self.finish_decl(ty, name);
        }
        let expr = self.parse_expr()?;
        let semi = self.expect(";")?;
        let first = self.nodes[expr as usize].first_tok;
        Ok(self.add(Node {
            kind: NodeKind::ExprStmt,
            children: vec![expr],
            first_tok: first,
            last_tok: semi as u32,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    fn parse_if(&mut self) -> Result<NodeId, Error> {
        let kw = self.expect("if")?;
        self.expect("(")?;
        let cond = self.parse_expr()?;
        self.expect(")")?;
        let then = self.parse_stmt()?;
        let mut children = vec![cond, then];
        let mut last = self.nodes[then as usize].last_tok;
        if self.at("else") {
            self.bump();
            let els = self.parse_stmt()?;
            last = self.nodes[els as usize].last_tok;
            children.push(els);
        }
        Ok(self.add(Node {
            kind: NodeKind::If,
            children,
            first_tok: kw as u32,
            last_tok: last,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    fn parse_for(&mut self) -> Result<NodeId, Error> {
        let kw = self.expect("for")?;
        self.expect("(")?;
        if self.range_for_ahead() {
            return self.parse_range_for(kw);
        }
        let init = if self.at(";") {
            self.empty_here()
        } else if let Some(shape) = self.decl_lookahead(&[";", "=", "["]) {
            let ty = self.take_type(shape);
            let name = {
                let i = self.bump();
                self.leaf(NodeKind::Ident, i)
            };
            let mut children = vec![ty, name];
            let mut last = self.nodes[name as usize].last_tok;
            if self.eat("=").is_some() {
                let e = self.parse_assign()?;
                last = self.nodes[e as usize].last_tok;
                children.push(e);
            }
            let first = self.nodes[ty as usize].first_tok;
            self.add(Node {
                kind: NodeKind::DeclStmt,
                children,
                first_tok: first,
                last_tok: last,
                op_tok: NO_TOK,
                aux: 0,
            })
        } else {
            self.parse_expr()?
        };
        self.expect(";")?;
        let cond = if self.at(";") { self.empty_here() } else { self.parse_expr()? };
        self.expect(";")?;
        let upd = if self.at(")") { self.empty_here() } else { self.parse_expr()? };
        self.expect(")")?;
        let body = self.parse_stmt()?;
        let last = self.nodes[body as usize].last_tok;
        Ok(self.add(Node {
            kind: NodeKind::For,
            children: vec![init, cond, upd, body],
            first_tok: kw as u32,
            last_tok: last,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    /// After `for (`, decides range-for by whether `:` appears before `;` at
    /// paren depth zero.
    fn range_for_ahead(&mut self) -> bool {
        self.skip_trivia();
        let mut idx = self.pos;
        let mut depth = 0usize;
        while idx < self.toks.len() {
            let t = self.tok_text(idx);
            match t {
                b"(" | b"[" => depth += 1,
                b")" | b"]" => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                b";" if depth == 0 => return false,
                b":" if depth == 0 => return true,
                _ => {}
            }
            idx += 1;
        }
        false
    }

    fn parse_range_for(&mut self, kw: usize) -> Result<NodeId, Error> {
        // `for ( T [&] name : iterable ) body`
        self.skip_trivia();
        let ty_first = self.pos;
        let mut ty_last = None;
        while let Some(t) = self.peek() {
            if matches!(t.kind, TokenKind::Ident | TokenKind::Keyword) {
                // a word directly followed by `:` is the element name, not
                // part of the type; a word before `&` still belongs to the type
                let cur = self.pos;
                let after = self.sig_after(cur);
                if self.tok_text(after) == b":" {
                    break;
                }
                ty_last = Some(cur);
                self.bump();
            } else {
                break;
            }
        }
        let Some(ty_last) = ty_last else {
            return Err(self.err_here("expected element type in range-for"));
        };
        let ty = self.add(Node {
            kind: NodeKind::TypeName,
            children: Vec::new(),
            first_tok: ty_first as u32,
            last_tok: ty_last as u32,
            op_tok: NO_TOK,
            aux: 0,
        });
        let byref = if self.at("&") {
            self.bump();
            1
        } else {
            0
        };
        let name = {
            let t = self.peek().ok_or_else(|| self.err_here("expected element name"))?;
            if t.kind != TokenKind::Ident {
                return Err(self.err_here("expected element name"));
            }
            let i = self.bump();
            self.leaf(NodeKind::Ident, i)
        };
        self.expect(":")?;
        let iter = self.parse_expr()?;
        self.expect(")")?;
        let body = self.parse_stmt()?;
        let last = self.nodes[body as usize].last_tok;
        Ok(self.add(Node {
            kind: NodeKind::RangeFor,
            children: vec![ty, name, iter, body],
            first_tok: kw as u32,
            last_tok: last,
            op_tok: NO_TOK,
            aux: byref,
        }))
    }

    fn empty_here(&mut self) -> NodeId {
        self.skip_trivia();
        let here = self.pos.min(self.toks.len().saturating_sub(1)) as u32;
        self.add(Node {
            kind: NodeKind::Empty,
            children: Vec::new(),
            first_tok: here,
            last_tok: here,
            op_tok: NO_TOK,
            aux: 0,
        })
    }

    // ----- expressions -----------------------------------------------------

    fn parse_expr(&mut self) -> Result<NodeId, Error> {
        self.parse_assign()
    }

    fn parse_assign(&mut self) -> Result<NodeId, Error> {
        let lhs = self.parse_binary(1)?;
        let text = self.peek_text().to_vec();
        if ASSIGN_OPS.iter().any(|op| op.as_bytes() == text) {
            let op = self.bump();
            let rhs = self.parse_assign()?;
            let first = self.nodes[lhs as usize].first_tok;
            let last = self.nodes[rhs as usize].last_tok;
            return Ok(self.add(Node {
                kind: NodeKind::Assign,
                children: vec![lhs, rhs],
                first_tok: first,
                last_tok: last,
                op_tok: op as u32,
                aux: 0,
            }));
        }
        Ok(lhs)
    }

    fn parse_binary(&mut self, min_prec: u8) -> Result<NodeId, Error> {
        let mut lhs = self.parse_unary()?;
        loop {
            let text = self.peek_text();
            let Some(prec) = binary_prec(text) else { break };
            if prec < min_prec {
                break;
            }
            let op = self.bump();
            let rhs = self.parse_binary(prec + 1)?;
            let first = self.nodes[lhs as usize].first_tok;
            let last = self.nodes[rhs as usize].last_tok;
            lhs = self.add(Node {
                kind: NodeKind::Binary,
                children: vec![lhs, rhs],
                first_tok: first,
                last_tok: last,
                op_tok: op as u32,
                aux: 0,
            });
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<NodeId, Error> {
        let text = self.peek_text();
        if matches!(text, b"+" | b"-" | b"!" | b"~" | b"*" | b"&" | b"++" | b"--") {
            let op = self.bump();
            let operand = self.parse_unary()?;
            let last = self.nodes[operand as usize].last_tok;
            return Ok(self.add(Node {
                kind: NodeKind::Unary,
                children: vec![operand],
                first_tok: op as u32,
                last_tok: last,
                op_tok: op as u32,
                aux: 0,
            }));
        }
        self.parse_postfix()
    }

    fn parse_postfix(&mut self) -> Result<NodeId, Error> {
        let mut base = self.parse_primary()?;
        loop {
            if self.at("(") {
                let args = self.parse_arg_list_parens()?;
                let first = self.nodes[base as usize].first_tok;
                let last = self.nodes[args as usize].last_tok;
                base = self.add(Node {
                    kind: NodeKind::Call,
                    children: vec![base, args],
                    first_tok: first,
                    last_tok: last,
                    op_tok: NO_TOK,
                    aux: 0,
                });
                if self.at("{") {
                    let body = self.parse_compound()?;
                    let node = self.nodes[base as usize].clone();
                    let last = self.nodes[body as usize].last_tok;
                    base = self.add(Node {
                        kind: NodeKind::CallWithBody,
                        children: vec![node.children[0], node.children[1], body],
                        first_tok: node.first_tok,
                        last_tok: last,
                        op_tok: NO_TOK,
                        aux: 0,
                    });
                }
                continue;
            }
            if self.at("<<<") {
                base = self.parse_chevron(base)?;
                continue;
            }
            if self.at("[") {
                let open = self.bump();
                let mut elems = vec![self.parse_assign()?];
                while self.eat(",").is_some() {
                    elems.push(self.parse_assign()?);
                }
                let close = self.expect("]")?;
                let first = self.nodes[base as usize].first_tok;
                if elems.len() == 1 {
                    base = self.add(Node {
                        kind: NodeKind::Subscript,
                        children: vec![base, elems[0]],
                        first_tok: first,
                        last_tok: close as u32,
                        op_tok: open as u32,
                        aux: close as u32,
                    });
                } else {
                    let args = self.add(Node {
                        kind: NodeKind::ArgList,
                        children: elems,
                        first_tok: open as u32,
                        last_tok: close as u32,
                        op_tok: open as u32,
                        aux: close as u32,
                    });
                    base = self.add(Node {
                        kind: NodeKind::CommaSubscript,
                        children: vec![base, args],
                        first_tok: first,
                        last_tok: close as u32,
                        op_tok: open as u32,
                        aux: close as u32,
                    });
                }
                continue;
            }
            if self.at(".") || self.at("->") {
                let op = self.bump();
                let t = self.peek().ok_or_else(|| self.err_here("expected member name"))?;
                if !matches!(t.kind, TokenKind::Ident) {
                    return Err(self.err_here("expected member name"));
                }
                let i = self.bump();
                let name = self.leaf(NodeKind::Ident, i);
                let first = self.nodes[base as usize].first_tok;
                let last = self.nodes[name as usize].last_tok;
                base = self.add(Node {
                    kind: NodeKind::Member,
                    children: vec![base, name],
                    first_tok: first,
                    last_tok: last,
                    op_tok: op as u32,
                    aux: 0,
                });
                continue;
            }
            if self.at("++") || self.at("--") {
                let op = self.bump();
                let first = self.nodes[base as usize].first_tok;
                base = self.add(Node {
                    kind: NodeKind::Postfix,
                    children: vec![base],
                    first_tok: first,
                    last_tok: op as u32,
                    op_tok: op as u32,
                    aux: 0,
                });
                continue;
            }
            break;
        }
        Ok(base)
    }

    fn parse_chevron(&mut self, callee: NodeId) -> Result<NodeId, Error> {
        self.expect("<<<")?;
        let mut cfg = vec![self.parse_assign()?];
        while self.eat(",").is_some() {
            cfg.push(self.parse_assign()?);
        }
        if cfg.len() != 4 {
            return Err(self.err_here(&format!(
                "chevron call takes exactly 4 configuration expressions, got {}",
                cfg.len()
            )));
        }
        self.expect(">>>")?;
        if !self.at("(") {
            return Err(self.err_here("expected argument list after `>>>`"));
        }
        let args = self.parse_arg_list_parens()?;
        let first = self.nodes[callee as usize].first_tok;
        let last = self.nodes[args as usize].last_tok;
        let mut children = vec![callee];
        children.extend(cfg);
        children.push(args);
        Ok(self.add(Node {
            kind: NodeKind::ChevronCall,
            children,
            first_tok: first,
            last_tok: last,
            op_tok: NO_TOK,
            aux: 0,
        }))
    }

    fn parse_arg_list_parens(&mut self) -> Result<NodeId, Error> {
        let open = self.expect("(")?;
        let mut children = Vec::new();
        if !self.at(")") {
            loop {
                children.push(self.parse_arg()?);
                if self.eat(",").is_none() {
                    break;
                }
            }
        }
        let close = self.expect(")")?;
        Ok(self.add(Node {
            kind: NodeKind::ArgList,
            children,
            first_tok: open as u32,
            last_tok: close as u32,
            op_tok: open as u32,
            aux: close as u32,
        }))
    }

    /// One call argument: either an expression or a declaration-style
    /// argument (`const int i`) — two or more type words ending right before
    /// `,` or `)`.
    fn parse_arg(&mut self) -> Result<NodeId, Error> {
        self.skip_trivia();
        let start = self.pos;
        let mut idx = self.pos;
        let mut words = 0usize;
        while idx < self.toks.len()
            && matches!(self.toks[idx].kind, TokenKind::Ident | TokenKind::Keyword)
        {
            words += 1;
            idx = self.sig_after(idx);
        }
        if words >= 2 && matches!(self.tok_text(idx), b"," | b")") {
            let mut last = start;
            for _ in 0..words {
                last = self.bump();
            }
            return Ok(self.add(Node {
                kind: NodeKind::TypedArg,
                children: Vec::new(),
                first_tok: start as u32,
                last_tok: last as u32,
                op_tok: NO_TOK,
                aux: 0,
            }));
        }
        self.parse_assign()
    }

    fn parse_primary(&mut self) -> Result<NodeId, Error> {
        self.skip_trivia();
        let Some(t) = self.toks.get(self.pos).copied() else {
            return Err(self.err_here("expected expression"));
        };
        match t.kind {
            TokenKind::Ident => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::Ident, i))
            }
            TokenKind::Keyword if matches!(t.text(self.src), b"true" | b"false") => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::Ident, i))
            }
            TokenKind::IntLit => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::IntLit, i))
            }
            TokenKind::FloatLit => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::FloatLit, i))
            }
            TokenKind::StrLit => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::StrLit, i))
            }
            TokenKind::CharLit => {
                let i = self.bump();
                Ok(self.leaf(NodeKind::CharLit, i))
            }
            _ if t.text(self.src) == b"(" => {
                let open = self.bump();
                let mut elems = vec![self.parse_assign()?];
                while self.eat(",").is_some() {
                    elems.push(self.parse_assign()?);
                }
                let close = self.expect(")")?;
                let kind = if elems.len() == 1 { NodeKind::Paren } else { NodeKind::ParenList };
                Ok(self.add(Node {
                    kind,
                    children: elems,
                    first_tok: open as u32,
                    last_tok: close as u32,
                    op_tok: open as u32,
                    aux: close as u32,
                }))
            }
            _ => Err(self.err_here("expected expression")),
        }
    }

    fn leaf(&mut self, kind: NodeKind, tok: usize) -> NodeId {
        self.add(Node {
            kind,
            children: Vec::new(),
            first_tok: tok as u32,
            last_tok: tok as u32,
            op_tok: NO_TOK,
            aux: 0,
        })
    }
}

fn range_of(nodes: &[Node], children: &[NodeId]) -> (u32, u32) {
    let firsts: Vec<u32> = children
        .iter()
        .map(|&c| nodes[c as usize].first_tok)
        .filter(|&t| t != NO_TOK)
        .collect();
    if firsts.is_empty() {
        return (NO_TOK, NO_TOK);
    }
    let first = *firsts.iter().min().unwrap();
    let last = children
        .iter()
        .map(|&c| nodes[c as usize].last_tok)
        .filter(|&t| t != NO_TOK)
        .max()
        .unwrap();
    (first, last)
}

#[cfg(test)]
mod tests {
    use super::super::ast::NodeKind;
    use super::*;

    fn kind_of(src: &str) -> NodeKind {
        let t = parse_expr_fragment(src.as_bytes()).unwrap();
        t.node(t.root).kind
    }

    #[test]
    fn subscript_chain_depth_three() {
        let t = parse_expr_fragment(b"a[x][y][z]").unwrap();
        let mut id = t.root;
        for _ in 0..3 {
            assert_eq!(t.node(id).kind, NodeKind::Subscript);
            id = t.node(id).children[0];
        }
        assert_eq!(t.node(id).kind, NodeKind::Ident);
    }

    #[test]
    fn comma_subscript() {
        let t = parse_expr_fragment(b"a[x, y, z]").unwrap();
        assert_eq!(t.node(t.root).kind, NodeKind::CommaSubscript);
        let args = t.node(t.root).children[1];
        assert_eq!(t.node(args).children.len(), 3);
    }

    #[test]
    fn chevron_call_shape() {
        let t = parse_expr_fragment(b"k<<<b,t,x,y>>>(el)").unwrap();
        let n = t.node(t.root);
        assert_eq!(n.kind, NodeKind::ChevronCall);
        assert_eq!(n.children.len(), 6);
    }

    #[test]
    fn chevron_requires_four_configs() {
        assert!(parse_expr_fragment(b"k<<<b,t>>>(el)").is_err());
    }

    #[test]
    fn multiplication_binds_tighter_than_addition() {
        let t = parse_expr_fragment(b"a + b * c").unwrap();
        let root = t.node(t.root);
        assert_eq!(root.kind, NodeKind::Binary);
        assert_eq!(t.tok_text(root.op_tok), b"+");
        let rhs = t.node(root.children[1]);
        assert_eq!(t.tok_text(rhs.op_tok), b"*");
    }

    #[test]
    fn attributed_function_definition() {
        let src = b"__attribute__((target(\"default\"))) int f(int n) { return n; }";
        let t = parse(src, "t.c").unwrap();
        let tu = t.node(t.root);
        assert_eq!(tu.children.len(), 1);
        let f = t.node(tu.children[0]);
        assert_eq!(f.kind, NodeKind::FnDef);
        let attrs = t.node(f.children[0]);
        assert_eq!(attrs.children.len(), 1);
        assert_eq!(t.slice(f.children[2]), b"f");
    }

    #[test]
    fn range_for_parses() {
        let t = parse_stmt_fragment(b"for ( double &e : v ) x = e;").unwrap();
        let n = t.node(t.root);
        assert_eq!(n.kind, NodeKind::RangeFor);
        assert_eq!(n.aux, 1);
        assert_eq!(t.slice(n.children[0]), b"double");
        assert_eq!(t.slice(n.children[1]), b"e");
    }

    #[test]
    fn lambda_macro_argument_parses() {
        let src = b"parallel_reduce(RangePolicy<Host>(0,n), KOKKOS_LAMBDA(const int i){ r += a[i]; });";
        let t = parse_stmt_fragment(src).unwrap();
        assert_eq!(t.node(t.root).kind, NodeKind::ExprStmt);
    }

    #[test]
    fn declaration_vs_expression_statement() {
        let d = parse_stmt_fragment(b"__half h;").unwrap();
        assert_eq!(d.node(d.root).kind, NodeKind::DeclStmt);
        let e = parse_stmt_fragment(b"h = load_half();").unwrap();
        assert_eq!(e.node(e.root).kind, NodeKind::ExprStmt);
        let p = parse_stmt_fragment(b"double *p;").unwrap();
        assert_eq!(p.node(p.root).kind, NodeKind::DeclStmt);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse(b"int f() { return ; ", "bad.c").unwrap_err();
        match err {
            Error::CSyntax { pos, .. } => {
                assert_eq!(pos.file, "bad.c");
                assert!(pos.line >= 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unparse_returns_input() {
        let src = b"#include <omp.h>\n\nint g;\n\nvoid f(void) {\n  g = 1; /* note */\n}\n";
        let t = parse(src, "u.c").unwrap();
        assert_eq!(unparse(&t), src);
    }

    #[test]
    fn paren_comma_list() {
        assert_eq!(kind_of("(0, n)"), NodeKind::ParenList);
        assert_eq!(kind_of("(n)"), NodeKind::Paren);
    }
}
