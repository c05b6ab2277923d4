//! Pattern matching against a parsed source file.
//!
//! A match attempt walks the pattern and the syntax tree together, recording
//! three things besides metavariable bindings:
//!
//! * a byte span for each pattern token it can anchor in the source, so
//!   deletions and insertions know where to land;
//! * occurrence lists for containment branches (`<expr>` constraints inside
//!   conjunctions), since rewrites of a contained expression apply to every
//!   occurrence in the constrained window;
//! * the full node span of any pattern element whose tokens are all removed,
//!   so deletions take whole statements (and their punctuation) with them.
//!
//! From those the matcher derives `MinusRun`s (maximal runs of removed
//! pattern tokens with their source spans) and a placement plan for every
//! plus chunk. Scanning is leftmost-outermost and non-overlapping: statement
//! patterns slide a window over every statement list, expression patterns
//! walk expressions in preorder and skip the subtree of each match.

use super::binding::{Bindings, BoundValue};
use crate::c_frontend::{NodeId, NodeKind, SyntaxTree, NO_TOK};
use crate::smpl::{
    Attach, BodyShape, Constraint, ForSlot, GroupKind, MetavarDecl, MetavarKind, PArg, PAttr,
    PBranch, PExpr, PGroup, PStmt, PTokId, PatchRule, PatternBody, PragmaTail, PParams,
};

/// Maximal run of consecutive removed pattern tokens, resolved to the source
/// spans it deletes. Multiple spans arise from containment constraints, where
/// every occurrence of the contained expression is rewritten.
#[derive(Debug, Clone)]
pub struct MinusRun {
    pub t0: PTokId,
    pub t1: PTokId,
    pub spans: Vec<(usize, usize)>,
    /// The run removes a whole function definition (its deletion also absorbs
    /// one trailing blank line).
    pub whole_fn: bool,
}

/// Where one plus chunk lands for a particular match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChunkPlan {
    /// Replaces the spans of the given minus run (index into `minus_runs`).
    ReplaceRun(usize),
    /// Inserted immediately before this byte offset.
    InsertBefore(usize),
    /// Inserted after the line containing `offset - 1`.
    InsertAfterEnd(usize),
    /// Anchored to a pattern region that did not map anywhere (for example a
    /// losing disjunction branch); emits nothing.
    Drop,
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    /// Byte span of the matched site.
    pub site: (usize, usize),
    /// Rule-local bindings, including inherited seeds.
    pub bindings: Vec<(String, BoundValue)>,
    pub minus_runs: Vec<MinusRun>,
    /// One entry per plus chunk of the pattern, in chunk order.
    pub chunk_plans: Vec<ChunkPlan>,
}

/// Matches one patch rule everywhere in `tree`. `seed` carries inherited
/// bindings under their rule-local names; a site only matches if its own
/// bindings stay consistent with the seed.
pub fn match_rule(
    tree: &SyntaxTree,
    patch: &PatchRule,
    seed: &[(String, BoundValue)],
) -> Vec<MatchResult> {
    let mut results = Vec::new();
    let barriers = branch_barriers(&patch.body.shape);
    match &patch.body.shape {
        BodyShape::Expr(pe) => {
            let mut stack = vec![tree.root];
            while let Some(id) = stack.pop() {
                if tree.node(id).kind.is_expr() {
                    let mut m = Matcher::new(tree, patch, seed);
                    if m.match_expr(pe, id) {
                        results.push(m.finish(tree.span(id), &patch.body, &barriers));
                        continue; // non-overlapping: skip the matched subtree
                    }
                }
                for &c in tree.node(id).children.iter().rev() {
                    stack.push(c);
                }
            }
        }
        BodyShape::Stmts(pats) => {
            for list in tree.stmt_lists() {
                let kids = tree.node(list).children.clone();
                let boundary = match tree.node(list).kind {
                    NodeKind::Compound => {
                        tree.tokens[tree.node(list).last_tok as usize].start
                    }
                    _ => tree.src.len(),
                };
                let mut i = 0;
                while i < kids.len() {
                    let mut m = Matcher::new(tree, patch, seed);
                    let consumed = m
                        .match_seq(pats, &kids[i..], boundary, false)
                        .filter(|&c| c > 0);
                    if let Some(c) = consumed {
                        let site =
                            (tree.span(kids[i]).0, tree.span(kids[i + c - 1]).1);
                        results.push(m.finish(site, &patch.body, &barriers));
                        i += c;
                    } else {
                        i += 1;
                    }
                }
            }
        }
    }
    results
}

/// Token ids that start a group or inline-disjunction branch. Minus runs
/// never extend across these, since the branch markers themselves are not
/// pattern tokens.
fn branch_barriers(shape: &BodyShape) -> std::collections::BTreeSet<PTokId> {
    let mut out = std::collections::BTreeSet::new();
    match shape {
        BodyShape::Stmts(ss) => {
            for s in ss {
                barrier_stmt(s, &mut out);
            }
        }
        BodyShape::Expr(e) => barrier_expr(e, &mut out),
    }
    out
}

fn barrier_stmt(p: &PStmt, out: &mut std::collections::BTreeSet<PTokId>) {
    match p {
        PStmt::Group(g) => {
            for b in &g.branches {
                match b {
                    PBranch::Stmts(ss) => {
                        if let Some(first) = ss.first() {
                            out.insert(first.tok_range().0);
                        }
                        for s in ss {
                            barrier_stmt(s, out);
                        }
                    }
                    PBranch::Contains(e) => {
                        out.insert(e.tok_range().0);
                        barrier_expr(e, out);
                    }
                }
            }
        }
        PStmt::Compound { stmts, .. } => {
            for s in stmts {
                barrier_stmt(s, out);
            }
        }
        PStmt::FnDef { attrs, body, .. } => {
            for a in attrs {
                for arg in &a.args {
                    if let PArg::Expr(e) = arg {
                        barrier_expr(e, out);
                    }
                }
            }
            for s in body {
                barrier_stmt(s, out);
            }
        }
        PStmt::For { init, cond, update, body, .. } => {
            for slot in [init, cond, update] {
                match slot {
                    ForSlot::Expr(e) => barrier_expr(e, out),
                    ForSlot::Decl { ty, name, init, .. } => {
                        barrier_expr(ty, out);
                        barrier_expr(name, out);
                        if let Some(e) = init {
                            barrier_expr(e, out);
                        }
                    }
                    ForSlot::Dots { .. } | ForSlot::Empty => {}
                }
            }
            barrier_stmt(body, out);
        }
        PStmt::RangeFor { iter, body, .. } => {
            barrier_expr(iter, out);
            barrier_stmt(body, out);
        }
        PStmt::If { cond, then, .. } => {
            barrier_expr(cond, out);
            barrier_stmt(then, out);
        }
        PStmt::While { cond, body, .. } => {
            barrier_expr(cond, out);
            barrier_stmt(body, out);
        }
        PStmt::Return { value: Some(e), .. } => barrier_expr(e, out),
        PStmt::ExprStmt { expr, .. } => barrier_expr(expr, out),
        PStmt::Decl { ty, name, init, .. } => {
            barrier_expr(ty, out);
            barrier_expr(name, out);
            if let Some(e) = init {
                barrier_expr(e, out);
            }
        }
        _ => {}
    }
}

fn barrier_expr(e: &PExpr, out: &mut std::collections::BTreeSet<PTokId>) {
    match e {
        PExpr::Alt { branches, .. } => {
            for b in branches {
                out.insert(b.tok_range().0);
                barrier_expr(b, out);
            }
        }
        PExpr::Unary { operand, .. } | PExpr::Postfix { operand, .. } => {
            barrier_expr(operand, out)
        }
        PExpr::Binary { lhs, rhs, .. } | PExpr::Assign { lhs, rhs, .. } => {
            barrier_expr(lhs, out);
            barrier_expr(rhs, out);
        }
        PExpr::Call { callee, args, .. } => {
            barrier_expr(callee, out);
            for a in args {
                if let PArg::Expr(x) = a {
                    barrier_expr(x, out);
                }
            }
        }
        PExpr::Chevron { callee, cfg, args, .. } => {
            barrier_expr(callee, out);
            for c in cfg {
                barrier_expr(c, out);
            }
            for a in args {
                if let PArg::Expr(x) = a {
                    barrier_expr(x, out);
                }
            }
        }
        PExpr::Subscript { base, index, .. } => {
            barrier_expr(base, out);
            barrier_expr(index, out);
        }
        PExpr::CommaSubscript { base, indices, .. } => {
            barrier_expr(base, out);
            for i in indices {
                barrier_expr(i, out);
            }
        }
        PExpr::Member { base, name, .. } => {
            barrier_expr(base, out);
            barrier_expr(name, out);
        }
        PExpr::Paren { elems, .. } => {
            for x in elems {
                barrier_expr(x, out);
            }
        }
        _ => {}
    }
}

struct Matcher<'a> {
    tree: &'a SyntaxTree,
    body: &'a PatternBody,
    decls: &'a [MetavarDecl],
    binds: Bindings,
    tok_spans: Vec<Option<(usize, usize)>>,
    /// Undo journal for `tok_spans`.
    journal: Vec<(PTokId, Option<(usize, usize)>)>,
    /// (branch token range, all occurrence spans) per containment constraint.
    containments: Vec<(PTokId, PTokId, Vec<(usize, usize)>)>,
    /// (anchor pattern token, node span, is function) per fully-removed
    /// pattern statement.
    whole_nodes: Vec<(PTokId, (usize, usize), bool)>,
}

struct Mark {
    binds: usize,
    journal: usize,
    containments: usize,
    whole_nodes: usize,
}

impl<'a> Matcher<'a> {
    fn new(tree: &'a SyntaxTree, patch: &'a PatchRule, seed: &[(String, BoundValue)]) -> Self {
        Matcher {
            tree,
            body: &patch.body,
            decls: &patch.metavars,
            binds: Bindings::seeded(seed),
            tok_spans: vec![None; patch.body.tokens.len()],
            journal: Vec::new(),
            containments: Vec::new(),
            whole_nodes: Vec::new(),
        }
    }

    fn mark(&self) -> Mark {
        Mark {
            binds: self.binds.mark(),
            journal: self.journal.len(),
            containments: self.containments.len(),
            whole_nodes: self.whole_nodes.len(),
        }
    }

    fn rollback(&mut self, m: Mark) {
        self.binds.rollback(m.binds);
        while self.journal.len() > m.journal {
            let (t, old) = self.journal.pop().unwrap();
            self.tok_spans[t] = old;
        }
        self.containments.truncate(m.containments);
        self.whole_nodes.truncate(m.whole_nodes);
    }

    fn set_tok(&mut self, t: PTokId, span: (usize, usize)) {
        self.journal.push((t, self.tok_spans[t]));
        self.tok_spans[t] = Some(span);
    }

    fn tspan(&self, tok: u32) -> (usize, usize) {
        let t = &self.tree.tokens[tok as usize];
        (t.start, t.end)
    }

    fn decl(&self, name: &str) -> Option<&MetavarDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    fn check_constraint(&self, d: &MetavarDecl, text: &str) -> bool {
        match &d.constraint {
            None => true,
            Some(Constraint::Regex(re)) => re.is_match(text),
            Some(Constraint::Set(items)) => items.iter().any(|s| s == text),
        }
    }

    fn bind_node(&mut self, name: &str, pos: &Option<String>, node: NodeId) -> bool {
        if !self.binds.bind(name, BoundValue::from_node(self.tree, node)) {
            return false;
        }
        self.bind_pos(pos, self.tree.span(node).0)
    }

    fn bind_pos(&mut self, pos: &Option<String>, offset: usize) -> bool {
        match pos {
            Some(p) => self.binds.bind(p, BoundValue::position(offset)),
            None => true,
        }
    }

    // ----- expressions ----------------------------------------------------

    fn match_expr(&mut self, p: &PExpr, id: NodeId) -> bool {
        let kind = self.tree.node(id).kind;
        match p {
            PExpr::Metavar { name, pos, t0 } => {
                let d = match self.decl(name) {
                    Some(d) => d,
                    None => return false,
                };
                let kind_ok = match d.kind {
                    MetavarKind::Identifier | MetavarKind::Function => kind == NodeKind::Ident,
                    MetavarKind::Constant => matches!(
                        kind,
                        NodeKind::IntLit
                            | NodeKind::FloatLit
                            | NodeKind::StrLit
                            | NodeKind::CharLit
                    ),
                    MetavarKind::Expression => kind.is_expr(),
                    _ => false,
                };
                if !kind_ok {
                    return false;
                }
                let text = String::from_utf8_lossy(self.tree.slice(id)).into_owned();
                if !self.check_constraint(d, &text) {
                    return false;
                }
                if !self.bind_node(name, pos, id) {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PExpr::Word { text, pos, t0 } => {
                if kind != NodeKind::Ident || self.tree.slice(id) != text.as_bytes() {
                    return false;
                }
                if !self.bind_pos(pos, self.tree.span(id).0) {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PExpr::Lit { text, t0 } => {
                let lit = matches!(
                    kind,
                    NodeKind::IntLit | NodeKind::FloatLit | NodeKind::StrLit | NodeKind::CharLit
                );
                if !lit || self.tree.slice(id) != text.as_bytes() {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PExpr::AnyExpr { tok } => {
                if !kind.is_expr() {
                    return false;
                }
                self.set_tok(*tok, self.tree.span(id));
                true
            }
            PExpr::Unary { op, operand, t0, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::Unary || self.tree.tok_text(n.op_tok) != op.as_bytes() {
                    return false;
                }
                let child = n.children[0];
                let op_span = self.tspan(n.op_tok);
                if !self.match_expr(operand, child) {
                    return false;
                }
                self.set_tok(*t0, op_span);
                true
            }
            PExpr::Postfix { op, operand, t1, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::Postfix || self.tree.tok_text(n.op_tok) != op.as_bytes() {
                    return false;
                }
                let child = n.children[0];
                let op_span = self.tspan(n.op_tok);
                if !self.match_expr(operand, child) {
                    return false;
                }
                self.set_tok(*t1, op_span);
                true
            }
            PExpr::Binary { op, lhs, rhs, .. } => {
                self.match_infix(NodeKind::Binary, op, lhs, rhs, id)
            }
            PExpr::Assign { op, lhs, rhs, .. } => {
                self.match_infix(NodeKind::Assign, op, lhs, rhs, id)
            }
            PExpr::Call { callee, args, t1, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::Call {
                    return false;
                }
                let (c0, argl) = (n.children[0], n.children[1]);
                if !self.match_expr(callee, c0) {
                    return false;
                }
                if !self.match_args(args, argl) {
                    return false;
                }
                self.map_close(*t1, argl);
                true
            }
            PExpr::Chevron { callee, cfg, args, t1, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::ChevronCall {
                    return false;
                }
                let kids = n.children.clone();
                if !self.match_expr(callee, kids[0]) {
                    return false;
                }
                for (pc, &sc) in cfg.iter().zip(&kids[1..5]) {
                    if !self.match_expr(pc, sc) {
                        return false;
                    }
                }
                if !self.match_args(args, kids[5]) {
                    return false;
                }
                self.map_close(*t1, kids[5]);
                true
            }
            PExpr::Subscript { base, index, t1, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::Subscript {
                    return false;
                }
                let kids = n.children.clone();
                let close = n.aux;
                if !self.match_expr(base, kids[0]) || !self.match_expr(index, kids[1]) {
                    return false;
                }
                if close != NO_TOK {
                    let sp = self.tspan(close);
                    self.set_tok(*t1, sp);
                }
                true
            }
            PExpr::CommaSubscript { base, indices, t1, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::CommaSubscript {
                    return false;
                }
                let kids = n.children.clone();
                if !self.match_expr(base, kids[0]) {
                    return false;
                }
                let argl = self.tree.node(kids[1]).children.clone();
                if argl.len() != indices.len() {
                    return false;
                }
                for (pi, &si) in indices.iter().zip(&argl) {
                    if !self.match_expr(pi, si) {
                        return false;
                    }
                }
                self.map_close(*t1, kids[1]);
                true
            }
            PExpr::Member { op, base, name, .. } => {
                let n = self.tree.node(id);
                if kind != NodeKind::Member || self.tree.tok_text(n.op_tok) != op.as_bytes() {
                    return false;
                }
                let kids = n.children.clone();
                self.match_expr(base, kids[0]) && self.match_expr(name, kids[1])
            }
            PExpr::Paren { elems, t0, t1 } => {
                let n = self.tree.node(id);
                let kids = n.children.clone();
                let (ft, lt) = (n.first_tok, n.last_tok);
                let ok = match kind {
                    NodeKind::Paren => elems.len() == 1 && self.match_expr(&elems[0], kids[0]),
                    NodeKind::ParenList => {
                        elems.len() == kids.len() && {
                            let mut all = true;
                            for (pe, &se) in elems.iter().zip(&kids) {
                                if !self.match_expr(pe, se) {
                                    all = false;
                                    break;
                                }
                            }
                            all
                        }
                    }
                    _ => false,
                };
                if !ok {
                    return false;
                }
                let (a, b) = (self.tspan(ft), self.tspan(lt));
                self.set_tok(*t0, a);
                self.set_tok(*t1, b);
                true
            }
            PExpr::Alt { branches, .. } => {
                for b in branches {
                    let m = self.mark();
                    if self.match_expr(b, id) {
                        return true;
                    }
                    self.rollback(m);
                }
                false
            }
        }
    }

    fn match_infix(
        &mut self,
        want: NodeKind,
        op: &str,
        lhs: &PExpr,
        rhs: &PExpr,
        id: NodeId,
    ) -> bool {
        let n = self.tree.node(id);
        if n.kind != want || self.tree.tok_text(n.op_tok) != op.as_bytes() {
            return false;
        }
        let kids = n.children.clone();
        let op_span = self.tspan(n.op_tok);
        if !self.match_expr(lhs, kids[0]) || !self.match_expr(rhs, kids[1]) {
            return false;
        }
        // Map the operator token, which sits right after the lhs pattern
        // tokens (guarded: position suffixes can shift it).
        let op_id = lhs.tok_range().1 + 1;
        if op_id < self.body.tokens.len() && self.body.tokens[op_id].text == op {
            self.set_tok(op_id, op_span);
        }
        true
    }

    /// Maps a pattern closing paren/bracket to the delimiter of a source
    /// ArgList so deletion hulls reach the closing punctuation.
    fn map_close(&mut self, t: PTokId, arglist: NodeId) {
        let close = self.tree.node(arglist).aux;
        if close != NO_TOK {
            let sp = self.tspan(close);
            self.set_tok(t, sp);
        }
    }

    fn match_args(&mut self, pats: &[PArg], arglist: NodeId) -> bool {
        let n = self.tree.node(arglist);
        let kids = n.children.clone();
        let boundary = if n.aux != NO_TOK {
            self.tree.tokens[n.aux as usize].start
        } else {
            self.tree.span(arglist).0
        };
        self.match_arg_seq(pats, &kids, boundary)
    }

    fn match_arg_seq(&mut self, pats: &[PArg], list: &[NodeId], boundary: usize) -> bool {
        let Some(p0) = pats.first() else {
            return list.is_empty();
        };
        match p0 {
            PArg::Dots { tok } => {
                for take in 0..=list.len() {
                    let m = self.mark();
                    let span = self.seq_span(list, take, boundary);
                    self.set_tok(*tok, span);
                    if self.match_arg_seq(&pats[1..], &list[take..], boundary) {
                        return true;
                    }
                    self.rollback(m);
                }
                false
            }
            PArg::MetaList { name, t0 } => {
                let kind_ok = self
                    .decl(name)
                    .map(|d| d.kind == MetavarKind::ExpressionList)
                    .unwrap_or(false);
                if !kind_ok {
                    return false;
                }
                for take in 0..=list.len() {
                    let m = self.mark();
                    let span = self.seq_span(list, take, boundary);
                    let text =
                        String::from_utf8_lossy(&self.tree.src[span.0..span.1]).into_owned();
                    if self.binds.bind(name, BoundValue::from_text(&text)) {
                        self.set_tok(*t0, span);
                        if self.match_arg_seq(&pats[1..], &list[take..], boundary) {
                            return true;
                        }
                    }
                    self.rollback(m);
                }
                false
            }
            PArg::Expr(e) => {
                let Some((&first, rest)) = list.split_first() else {
                    return false;
                };
                if self.tree.node(first).kind == NodeKind::TypedArg {
                    return false;
                }
                self.match_expr(e, first) && self.match_arg_seq(&pats[1..], rest, boundary)
            }
        }
    }

    /// Matches a pattern in type position (a `TypeName` leaf).
    fn match_type(&mut self, p: &PExpr, id: NodeId) -> bool {
        if self.tree.node(id).kind != NodeKind::TypeName {
            return false;
        }
        match p {
            PExpr::Metavar { name, pos, t0 } => {
                let d = match self.decl(name) {
                    Some(d) => d,
                    None => return false,
                };
                if d.kind != MetavarKind::Type {
                    return false;
                }
                let text = String::from_utf8_lossy(self.tree.slice(id)).into_owned();
                if !self.check_constraint(d, &text) {
                    return false;
                }
                if !self.bind_node(name, pos, id) {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PExpr::Word { text, t0, .. } => {
                let sig = self.tree.sig(id);
                if sig.len() != 1 || sig[0] != text.as_bytes() {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PExpr::Alt { branches, .. } => {
                for b in branches {
                    let m = self.mark();
                    if self.match_type(b, id) {
                        return true;
                    }
                    self.rollback(m);
                }
                false
            }
            _ => false,
        }
    }

    // ----- statements -------------------------------------------------------

    /// Matches a pattern sequence against (a window of) a statement list.
    /// `boundary` is the offset just past the last slot (used for zero-width
    /// dots spans); `exact` requires consuming the whole list.
    fn match_seq(
        &mut self,
        pats: &[PStmt],
        list: &[NodeId],
        boundary: usize,
        exact: bool,
    ) -> Option<usize> {
        let Some(p0) = pats.first() else {
            if exact && !list.is_empty() {
                return None;
            }
            return Some(0);
        };
        match p0 {
            PStmt::Dots { tok } => {
                for take in 0..=list.len() {
                    let m = self.mark();
                    let span = self.seq_span(list, take, boundary);
                    self.set_tok(*tok, span);
                    if let Some(rest) = self.match_seq(&pats[1..], &list[take..], boundary, exact)
                    {
                        return Some(take + rest);
                    }
                    self.rollback(m);
                }
                None
            }
            PStmt::MetaStmtList { name, t0, .. } => {
                let kind_ok = self
                    .decl(name)
                    .map(|d| d.kind == MetavarKind::StatementList)
                    .unwrap_or(false);
                if !kind_ok {
                    return None;
                }
                for take in 0..=list.len() {
                    let m = self.mark();
                    let span = self.seq_span(list, take, boundary);
                    let text =
                        String::from_utf8_lossy(&self.tree.src[span.0..span.1]).into_owned();
                    if self.binds.bind(name, BoundValue::from_text(&text)) {
                        self.set_tok(*t0, span);
                        if let Some(rest) =
                            self.match_seq(&pats[1..], &list[take..], boundary, exact)
                        {
                            return Some(take + rest);
                        }
                    }
                    self.rollback(m);
                }
                None
            }
            p => {
                let Some((&first, rest)) = list.split_first() else {
                    return None;
                };
                let m = self.mark();
                if self.match_stmt(p, first) {
                    self.note_whole(p, first);
                    if let Some(n) = self.match_seq(&pats[1..], rest, boundary, exact) {
                        return Some(1 + n);
                    }
                }
                self.rollback(m);
                None
            }
        }
    }

    /// Zero-width-or-covering span for `take` leading elements of `list`.
    fn seq_span(&self, list: &[NodeId], take: usize, boundary: usize) -> (usize, usize) {
        if take == 0 {
            let at = list.first().map(|&n| self.tree.span(n).0).unwrap_or(boundary);
            (at, at)
        } else {
            (self.tree.span(list[0]).0, self.tree.span(list[take - 1]).1)
        }
    }

    fn all_minus(&self, a: PTokId, b: PTokId) -> bool {
        a <= b && (a..=b).all(|t| self.body.tokens[t].minus)
    }

    /// Records the whole node span of a pattern element whose tokens are all
    /// removed, so the deletion covers punctuation the token mapping misses.
    /// Groups are handled per-branch in `match_group`.
    fn note_whole(&mut self, p: &PStmt, id: NodeId) {
        if matches!(p, PStmt::Group(_)) {
            return;
        }
        let (a, b) = p.tok_range();
        if !self.all_minus(a, b) {
            return;
        }
        let span = self.tree.span(id);
        let is_fn = matches!(p, PStmt::FnDef { .. });
        self.whole_nodes.push((a, span, is_fn));
    }

    fn match_stmt(&mut self, p: &PStmt, id: NodeId) -> bool {
        let n = self.tree.node(id);
        let kind = n.kind;
        let kids = n.children.clone();
        match p {
            PStmt::Dots { .. } | PStmt::MetaStmtList { .. } => false, // sequence-level only
            PStmt::MetaStmt { name, pos, t0, t1 } => {
                let kind_ok = self
                    .decl(name)
                    .map(|d| d.kind == MetavarKind::Statement)
                    .unwrap_or(false);
                // Function definitions and includes are top-level items, not
                // statements a statement metavariable may stand for.
                let stmt_ok = kind.is_stmt()
                    && !matches!(kind, NodeKind::FnDef | NodeKind::IncludeLine);
                if !kind_ok || !stmt_ok {
                    return false;
                }
                if !self.bind_node(name, pos, id) {
                    return false;
                }
                let span = self.tree.span(id);
                self.set_tok(*t0, span);
                if t1 != t0 {
                    self.set_tok(*t1, span);
                }
                true
            }
            PStmt::ExprStmt { expr, t1, .. } => {
                if kind != NodeKind::ExprStmt {
                    return false;
                }
                if !self.match_expr(expr, kids[0]) {
                    return false;
                }
                let semi = self.tspan(n.last_tok);
                self.set_tok(*t1, semi);
                true
            }
            PStmt::Decl { ty, name, init, t1, .. } => {
                if kind != NodeKind::DeclStmt {
                    return false;
                }
                if !self.match_type(ty, kids[0]) || !self.match_expr(name, kids[1]) {
                    return false;
                }
                match (init, kids.get(2)) {
                    (None, None) => {}
                    (Some(pe), Some(&ie)) => {
                        if !self.match_expr(pe, ie) {
                            return false;
                        }
                    }
                    _ => return false,
                }
                let semi = self.tspan(n.last_tok);
                self.set_tok(*t1, semi);
                true
            }
            PStmt::For { init, cond, update, body, t0, .. } => {
                if kind != NodeKind::For {
                    return false;
                }
                let kw = self.tspan(n.first_tok);
                if !self.match_for_slot(init, kids[0])
                    || !self.match_for_slot(cond, kids[1])
                    || !self.match_for_slot(update, kids[2])
                    || !self.match_stmt(body, kids[3])
                {
                    return false;
                }
                self.set_tok(*t0, kw);
                true
            }
            PStmt::RangeFor { ty, byref, name, iter, body, t0, .. } => {
                if kind != NodeKind::RangeFor || (n.aux == 1) != *byref {
                    return false;
                }
                let kw = self.tspan(n.first_tok);
                if !self.match_type(ty, kids[0])
                    || !self.match_expr(name, kids[1])
                    || !self.match_expr(iter, kids[2])
                    || !self.match_stmt(body, kids[3])
                {
                    return false;
                }
                self.set_tok(*t0, kw);
                true
            }
            PStmt::If { cond, then, t0, .. } => {
                if kind != NodeKind::If || kids.len() != 2 {
                    return false;
                }
                let kw = self.tspan(n.first_tok);
                if !self.match_expr(cond, kids[0]) || !self.match_stmt(then, kids[1]) {
                    return false;
                }
                self.set_tok(*t0, kw);
                true
            }
            PStmt::While { cond, body, t0, .. } => {
                if kind != NodeKind::While {
                    return false;
                }
                let kw = self.tspan(n.first_tok);
                if !self.match_expr(cond, kids[0]) || !self.match_stmt(body, kids[1]) {
                    return false;
                }
                self.set_tok(*t0, kw);
                true
            }
            PStmt::Return { value, t0, t1 } => {
                if kind != NodeKind::Return {
                    return false;
                }
                match (value, kids.first()) {
                    (None, None) => {}
                    (Some(pe), Some(&ve)) => {
                        if !self.match_expr(pe, ve) {
                            return false;
                        }
                    }
                    _ => return false,
                }
                let kw = self.tspan(n.first_tok);
                let semi = self.tspan(n.last_tok);
                self.set_tok(*t0, kw);
                self.set_tok(*t1, semi);
                true
            }
            PStmt::Break { t0, t1 } => {
                if kind != NodeKind::Break {
                    return false;
                }
                let kw = self.tspan(n.first_tok);
                let semi = self.tspan(n.last_tok);
                self.set_tok(*t0, kw);
                self.set_tok(*t1, semi);
                true
            }
            PStmt::Compound { stmts, t0, t1 } => {
                if kind != NodeKind::Compound {
                    return false;
                }
                let open = self.tspan(n.op_tok);
                let close = self.tspan(n.last_tok);
                let boundary = self.tree.tokens[n.last_tok as usize].start;
                self.set_tok(*t0, open);
                self.set_tok(*t1, close);
                self.match_seq(stmts, &kids, boundary, true).is_some()
            }
            PStmt::Pragma { words, tail, t0, .. } => {
                if kind != NodeKind::PragmaLine {
                    return false;
                }
                let text = normalize_directive(self.tree.slice(id));
                let mut src_words = text.split_whitespace();
                if src_words.next() != Some("#pragma") {
                    return false;
                }
                let src_words: Vec<&str> = src_words.collect();
                if src_words.len() < words.len()
                    || !words.iter().zip(&src_words).all(|(a, b)| a == b)
                {
                    return false;
                }
                let rest = &src_words[words.len()..];
                match tail {
                    PragmaTail::None => {
                        if !rest.is_empty() {
                            return false;
                        }
                    }
                    PragmaTail::Dots => {}
                    PragmaTail::Meta(name) => {
                        let kind_ok = self
                            .decl(name)
                            .map(|d| d.kind == MetavarKind::PragmaInfo)
                            .unwrap_or(false);
                        if !kind_ok || rest.is_empty() {
                            return false;
                        }
                        if !self.binds.bind(name, BoundValue::from_text(&rest.join(" "))) {
                            return false;
                        }
                    }
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PStmt::Include { target, t0, .. } => {
                if kind != NodeKind::IncludeLine {
                    return false;
                }
                let text = normalize_directive(self.tree.slice(id));
                let rest = match text.strip_prefix("#include") {
                    Some(r) => r.trim(),
                    None => return false,
                };
                if rest != target {
                    return false;
                }
                self.set_tok(*t0, self.tree.span(id));
                true
            }
            PStmt::FnDef { attrs, ret, name, params, body, t1, .. } => {
                if kind != NodeKind::FnDef {
                    return false;
                }
                let attr_kids = self.tree.node(kids[0]).children.clone();
                if attr_kids.len() != attrs.len() {
                    return false;
                }
                for (pa, &sa) in attrs.iter().zip(&attr_kids) {
                    if !self.match_attr(pa, sa) {
                        return false;
                    }
                }
                if !self.match_type(ret, kids[1]) || !self.match_expr(name, kids[2]) {
                    return false;
                }
                match params {
                    PParams::Dots => {}
                    PParams::Meta(nm) => {
                        let kind_ok = self
                            .decl(nm)
                            .map(|d| d.kind == MetavarKind::ParameterList)
                            .unwrap_or(false);
                        if !kind_ok {
                            return false;
                        }
                        let text = String::from_utf8_lossy(self.tree.interior_slice(kids[3]))
                            .into_owned();
                        if !self.binds.bind(nm, BoundValue::from_text(&text)) {
                            return false;
                        }
                    }
                }
                let cmp = self.tree.node(kids[4]);
                let close = self.tspan(cmp.last_tok);
                let boundary = self.tree.tokens[cmp.last_tok as usize].start;
                let cmp_kids = cmp.children.clone();
                if self.match_seq(body, &cmp_kids, boundary, true).is_none() {
                    return false;
                }
                self.set_tok(*t1, close);
                true
            }
            PStmt::Group(g) => self.match_group(g, id),
        }
    }

    fn match_for_slot(&mut self, slot: &ForSlot, id: NodeId) -> bool {
        let kind = self.tree.node(id).kind;
        match slot {
            ForSlot::Dots { tok } => {
                let span = self.tree.span(id);
                if span != (0, 0) {
                    self.set_tok(*tok, span);
                }
                true
            }
            ForSlot::Empty => kind == NodeKind::Empty,
            ForSlot::Expr(e) => self.match_expr(e, id),
            ForSlot::Decl { ty, name, init, t1, .. } => {
                if kind != NodeKind::DeclStmt {
                    return false;
                }
                let kids = self.tree.node(id).children.clone();
                if !self.match_type(ty, kids[0]) || !self.match_expr(name, kids[1]) {
                    return false;
                }
                match (init, kids.get(2)) {
                    (None, None) => {}
                    (Some(pe), Some(&ie)) => {
                        if !self.match_expr(pe, ie) {
                            return false;
                        }
                    }
                    _ => return false,
                }
                let span = self.tree.span(id);
                self.set_tok(*t1, (span.1, span.1));
                true
            }
        }
    }

    fn match_attr(&mut self, p: &PAttr, id: NodeId) -> bool {
        if self.tree.node(id).kind != NodeKind::Attr {
            return false;
        }
        let kids = self.tree.node(id).children.clone();
        if !self.match_expr(&p.name, kids[0]) {
            return false;
        }
        if !self.match_args(&p.args, kids[1]) {
            return false;
        }
        // Anchor the whole attribute for insertion/deletion placement.
        self.set_tok(p.t0, self.tree.span(id));
        true
    }

    fn match_group(&mut self, g: &PGroup, id: NodeId) -> bool {
        match g.kind {
            GroupKind::Disjunction => {
                for b in &g.branches {
                    let m = self.mark();
                    if self.match_branch(b, id) {
                        if let PBranch::Stmts(ss) = b {
                            if ss.len() == 1 {
                                self.note_whole(&ss[0], id);
                            }
                        }
                        return true;
                    }
                    self.rollback(m);
                }
                false
            }
            GroupKind::Conjunction => {
                let c_before = self.containments.len();
                let mut stmt_deleted = false;
                for b in &g.branches {
                    if !self.match_branch(b, id) {
                        return false;
                    }
                    if let PBranch::Stmts(ss) = b {
                        if ss.len() == 1 {
                            self.note_whole(&ss[0], id);
                            let (a, z) = ss[0].tok_range();
                            stmt_deleted |= self.all_minus(a, z);
                        }
                    }
                }
                // A fully removed statement branch subsumes any occurrence
                // rewrites recorded by sibling containment branches.
                if stmt_deleted {
                    for c in &mut self.containments[c_before..] {
                        c.2.clear();
                    }
                }
                true
            }
        }
    }

    fn match_branch(&mut self, b: &PBranch, id: NodeId) -> bool {
        match b {
            PBranch::Stmts(ss) => ss.len() == 1 && self.match_stmt(&ss[0], id),
            PBranch::Contains(e) => self.match_contains(e, id),
        }
    }

    /// Containment constraint: the first occurrence (preorder) fixes the
    /// bindings, then every expression matching under those bindings is
    /// recorded as a rewrite occurrence.
    fn match_contains(&mut self, e: &PExpr, id: NodeId) -> bool {
        let exprs = self.tree.exprs_under(id);
        let mut found = false;
        for &x in &exprs {
            let m = self.mark();
            if self.match_expr(e, x) {
                found = true;
                break;
            }
            self.rollback(m);
        }
        if !found {
            return false;
        }
        // Collect all occurrences (outermost, non-overlapping) under the now
        // fixed bindings; trial state is rolled back each time.
        let mut occs = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if self.tree.node(x).kind.is_expr() {
                let m = self.mark();
                let hit = self.match_expr(e, x);
                self.rollback(m);
                if hit {
                    occs.push(self.tree.span(x));
                    continue;
                }
            }
            for &c in self.tree.node(x).children.iter().rev() {
                stack.push(c);
            }
        }
        let (rt0, rt1) = e.tok_range();
        self.containments.push((rt0, rt1, occs));
        true
    }

    // ----- result assembly --------------------------------------------------

    fn finish(
        self,
        site: (usize, usize),
        body: &PatternBody,
        barriers: &std::collections::BTreeSet<PTokId>,
    ) -> MatchResult {
        let toks = &body.tokens;
        let mut runs: Vec<MinusRun> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            if !toks[i].minus {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < toks.len() && toks[j + 1].minus && !barriers.contains(&(j + 1)) {
                j += 1;
            }
            let contained = self
                .containments
                .iter()
                .find(|(a, b, _)| *a <= i && j <= *b);
            let mut spans = Vec::new();
            let mut whole_fn = false;
            if let Some((_, _, occs)) = contained {
                spans = occs.clone();
            } else {
                let mut lo = usize::MAX;
                let mut hi = 0usize;
                for t in i..=j {
                    if let Some((a, b)) = self.tok_spans[t] {
                        lo = lo.min(a);
                        hi = hi.max(b);
                    }
                }
                for &(anchor, (a, b), is_fn) in &self.whole_nodes {
                    if i <= anchor && anchor <= j {
                        lo = lo.min(a);
                        hi = hi.max(b);
                        if is_fn {
                            whole_fn = true;
                        }
                    }
                }
                if lo != usize::MAX {
                    spans.push((lo, hi));
                }
            }
            runs.push(MinusRun { t0: i, t1: j, spans, whole_fn });
            i = j + 1;
        }

        let mut plans = Vec::new();
        for ch in &body.chunks {
            let plan = match ch.attach {
                Attach::Replace => {
                    let anchored = ch
                        .at
                        .checked_sub(1)
                        .and_then(|a| runs.iter().position(|r| r.t0 <= a && a <= r.t1));
                    match anchored {
                        Some(ri) if !runs[ri].spans.is_empty() => ChunkPlan::ReplaceRun(ri),
                        _ => ChunkPlan::Drop,
                    }
                }
                Attach::Insert => {
                    let next =
                        (ch.at..toks.len()).find_map(|t| self.tok_spans[t].map(|s| s.0));
                    match next {
                        Some(off) => ChunkPlan::InsertBefore(off),
                        None => {
                            let prev =
                                (0..ch.at).rev().find_map(|t| self.tok_spans[t].map(|s| s.1));
                            match prev {
                                Some(off) => ChunkPlan::InsertAfterEnd(off),
                                None => ChunkPlan::InsertBefore(site.0),
                            }
                        }
                    }
                }
            };
            plans.push(plan);
        }

        MatchResult {
            site,
            bindings: self.binds.into_entries(),
            minus_runs: runs,
            chunk_plans: plans,
        }
    }
}

/// Collapses backslash continuations and runs of whitespace in a directive
/// line to single spaces.
fn normalize_directive(text: &[u8]) -> String {
    let s = String::from_utf8_lossy(text);
    let joined = s.replace("\\\r\n", " ").replace("\\\n", " ");
    joined.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c_frontend::parse;
    use crate::smpl::parse_rules;

    fn matches_for(rule_text: &str, src: &str) -> (Vec<MatchResult>, SyntaxTree) {
        let rs = parse_rules(rule_text).expect("rule parses");
        let rule = &rs.rules[0];
        let patch = rule.patch().expect("patch rule");
        let tree = parse(src.as_bytes(), "t.c").expect("source parses");
        let res = match_rule(&tree, patch, &[]);
        (res, tree)
    }

    fn site_text<'a>(tree: &'a SyntaxTree, m: &MatchResult) -> &'a str {
        std::str::from_utf8(&tree.src[m.site.0..m.site.1]).unwrap()
    }

    fn bound<'a>(m: &'a MatchResult, name: &str) -> &'a str {
        m.bindings
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, v)| v.text())
            .unwrap()
    }

    #[test]
    fn window_scan_with_dots_is_leftmost_shortest() {
        let (res, tree) = matches_for(
            "@@\nexpression x;\n@@\n f(x);\n ...\n g(x);\n",
            "void t() {\n  f(1);\n  h();\n  g(1);\n  f(2);\n  g(2);\n}\n",
        );
        assert_eq!(res.len(), 2);
        assert!(site_text(&tree, &res[0]).starts_with("f(1);"));
        assert!(site_text(&tree, &res[0]).ends_with("g(1);"));
        assert_eq!(bound(&res[0], "x"), "1");
        assert_eq!(bound(&res[1], "x"), "2");
    }

    #[test]
    fn repeated_metavar_requires_equal_bindings() {
        let (res, _) = matches_for(
            "@@\nexpression x;\n@@\n f(x);\n g(x);\n",
            "void t() {\n  f(1);\n  g(2);\n  f(3);\n  g(3);\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "x"), "3");
    }

    #[test]
    fn statement_metavars_bind_structurally() {
        let (res, _) = matches_for(
            "@@\nstatement A;\n@@\n A\n A\n",
            "void t() {\n  x = 1;\n  x  =  1 ;\n  y = 2;\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "A"), "x = 1;");
    }

    #[test]
    fn constraint_sets_filter_matches() {
        let (res, _) = matches_for(
            "@@\nidentifier i = {i, j};\n@@\n f(i);\n",
            "void t() {\n  f(i);\n  f(m);\n  f(j);\n}\n",
        );
        assert_eq!(res.len(), 2);
    }

    #[test]
    fn regex_constraint_is_substring_match() {
        let (res, _) = matches_for(
            "@@\nidentifier fn =~ \"^cu\";\n@@\n fn(...);\n",
            "void t() {\n  cudaFree(p);\n  myFree(q);\n  cuInit(0);\n}\n",
        );
        assert_eq!(res.len(), 2);
    }

    #[test]
    fn expression_rule_scans_preorder_and_skips_matches() {
        // a[i][j] -> nested subscripts; the outer match consumes the subtree.
        let (res, tree) = matches_for(
            "@@\nexpression a, i, j;\n@@\n- a[i][j]\n+ a[i, j]\n",
            "void t() {\n  x[r][c] = y[r][c] + 1;\n}\n",
        );
        assert_eq!(res.len(), 2);
        assert_eq!(site_text(&tree, &res[0]), "x[r][c]");
        assert_eq!(site_text(&tree, &res[1]), "y[r][c]");
        // one minus run covering the whole site
        assert_eq!(res[0].minus_runs.len(), 1);
        assert_eq!(res[0].minus_runs[0].spans, vec![res[0].site]);
        assert_eq!(res[0].chunk_plans, vec![ChunkPlan::ReplaceRun(0)]);
    }

    #[test]
    fn call_args_dots_and_expression_list() {
        let (res, _) = matches_for(
            "@@\nexpression list el;\nidentifier k;\n@@\n k<<<1, 1, 0, 0>>>(el);\n",
            "void t() {\n  kern<<<1, 1, 0, 0>>>(a, b, n);\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "el"), "a, b, n");
    }

    #[test]
    fn empty_argument_list_binds_empty_text() {
        let (res, _) = matches_for(
            "@@\nexpression list el;\nidentifier fn;\n@@\n fn(el);\n",
            "void t() {\n  go();\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "el"), "");
    }

    #[test]
    fn fully_minus_statement_deletes_whole_node_span() {
        let (res, tree) = matches_for(
            "@@\ntype T;\nidentifier h;\n@@\n- T h;\n",
            "void t() {\n  __half h;\n  int k;\n}\n",
        );
        assert_eq!(res.len(), 2); // matches both declarations
        let run = &res[0].minus_runs[0];
        assert_eq!(run.spans.len(), 1);
        let (a, b) = run.spans[0];
        assert_eq!(&tree.src[a..b], b"__half h;");
    }

    #[test]
    fn containment_rewrites_every_occurrence() {
        let (res, tree) = matches_for(
            "@@\nstatement B;\nidentifier i;\n@@\n(\n B\n&\n- i+1\n+ i+0\n)\n",
            "void t() {\n  out[j+1] = in[j+1] * 2;\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "i"), "j");
        let run = &res[0].minus_runs[0];
        assert_eq!(run.spans.len(), 2);
        for &(a, b) in &run.spans {
            assert_eq!(&tree.src[a..b], b"j+1");
        }
        assert_eq!(res[0].chunk_plans, vec![ChunkPlan::ReplaceRun(0)]);
    }

    #[test]
    fn disjunction_takes_first_matching_branch() {
        let (res, _) = matches_for(
            "@@\nexpression x;\n@@\n(\n f(x);\n|\n g(x);\n)\n",
            "void t() {\n  g(7);\n  f(8);\n}\n",
        );
        assert_eq!(res.len(), 2);
        assert_eq!(bound(&res[0], "x"), "7");
        assert_eq!(bound(&res[1], "x"), "8");
    }

    #[test]
    fn pragma_prefix_and_tail_binding() {
        let (res, _) = matches_for(
            "@@\npragmainfo rest;\n@@\n #pragma acc parallel rest\n",
            "#pragma acc parallel loop gang\nvoid t() {}\n#pragma acc kernels\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "rest"), "loop gang");
    }

    #[test]
    fn pragma_continuation_lines_normalize() {
        let (res, _) = matches_for(
            "@@\npragmainfo rest;\n@@\n #pragma omp target rest\n",
            "#pragma omp target \\\n    teams distribute\nvoid t() {}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "rest"), "teams distribute");
    }

    #[test]
    fn include_matches_exact_target() {
        let (res, _) = matches_for(
            "@@\n@@\n #include <omp.h>\n",
            "#include <stdio.h>\n#include <omp.h>\n",
        );
        assert_eq!(res.len(), 1);
    }

    #[test]
    fn function_pattern_binds_parameter_list_and_body_insertions() {
        let rule = "@@\nidentifier fn =~ \"^krn_\";\nparameter list PL;\n@@\n void fn(PL)\n {\n+ prof_enter(fn);\n ...\n+ prof_exit(fn);\n }\n";
        let src = "void krn_axpy(int n, double a) {\n  run(n, a);\n}\nvoid other(int n) {\n  run(n, 0);\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "PL"), "int n, double a");
        // First chunk inserts before `run(...)`, second before the closing brace.
        let body_start = src.find("  run(n, a);").unwrap() + 2;
        let close = src.find("}\nvoid").unwrap();
        assert_eq!(
            res[0].chunk_plans,
            vec![ChunkPlan::InsertBefore(body_start), ChunkPlan::InsertBefore(close)]
        );
        let _ = tree;
    }

    #[test]
    fn attribute_pattern_with_dots_arguments() {
        let rule = "@@\ntype T;\nidentifier f;\nparameter list PL;\nstatement list SL;\n@@\n __attribute__((target(..., \"avx512\", ...))) T f(PL)\n {\n SL\n }\n";
        let src = "__attribute__((target(\"arch=x86-64\", \"avx512\"))) int hot(int x) {\n  return x;\n}\n__attribute__((target(\"sse2\"))) int cold(int x) {\n  return x;\n}\n";
        let (res, _) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "f"), "hot");
        assert_eq!(bound(&res[0], "SL"), "return x;");
    }

    #[test]
    fn function_without_attributes_requires_empty_attr_list() {
        let rule = "@@\ntype T;\nidentifier f;\nparameter list PL;\n@@\n T f(PL)\n {\n ...\n }\n";
        let src = "__attribute__((noinline)) int a(int x) {\n  return x;\n}\nint b(int x) {\n  return x;\n}\n";
        let (res, _) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "f"), "b");
    }

    #[test]
    fn seeded_bindings_restrict_matches() {
        let rs = parse_rules("@@\nidentifier fn;\nposition p;\n@@\n- fn@p(...);\n").unwrap();
        let patch = rs.rules[0].patch().unwrap();
        let tree = parse(b"void t() {\n  alpha(1);\n  beta(2);\n  alpha(3);\n}\n", "t.c").unwrap();
        let all = match_rule(&tree, patch, &[]);
        assert_eq!(all.len(), 3);
        // Seed fn=alpha plus the position of the *second* alpha call.
        let seed_pos = all[2]
            .bindings
            .iter()
            .find(|(n, _)| n == "p")
            .map(|(_, v)| v.clone())
            .unwrap();
        let seed = vec![
            ("fn".to_string(), BoundValue::from_text("alpha")),
            ("p".to_string(), seed_pos),
        ];
        let seeded = match_rule(&tree, patch, &seed);
        assert_eq!(seeded.len(), 1);
        assert_eq!(seeded[0].site, all[2].site);
    }

    #[test]
    fn empty_block_insertion_points_sit_before_closing_brace() {
        let rule = "@@\n@@\n #pragma omp parallel\n {\n+ enter();\n ...\n+ leave();\n }\n";
        let src = "void t() {\n  #pragma omp parallel\n  {\n  }\n}\n";
        let (res, _) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        let close = src.rfind("  }\n}").unwrap() + 2;
        assert_eq!(
            res[0].chunk_plans,
            vec![ChunkPlan::InsertBefore(close), ChunkPlan::InsertBefore(close)]
        );
    }

    #[test]
    fn range_for_and_if_with_break() {
        let rule = "@@\nidentifier v, arr, flag;\nexpression e;\n@@\n for (int v : arr)\n {\n if (v == e)\n {\n flag = true;\n break;\n }\n }\n";
        let src = "bool find(int key) {\n  for (int x : data) {\n    if (x == key) {\n      found = true;\n      break;\n    }\n  }\n  return found;\n}\n";
        let (res, _) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "v"), "x");
        assert_eq!(bound(&res[0], "e"), "key");
    }

    #[test]
    fn for_header_slot_dots_and_partial_rewrite() {
        let rule = "@@\nidentifier i;\nexpression n;\nconstant k = {4};\n@@\n for (...; i < n;\n- i += k\n+ ++i\n )\n {\n ...\n }\n";
        let src = "void t() {\n  for (int j = 0; j < len; j += 4) {\n    s += j;\n  }\n  for (int j = 0; j < len; j += 2) {\n    s += j;\n  }\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1, "stride-2 loop must not match");
        assert_eq!(bound(&res[0], "i"), "j");
        let run = &res[0].minus_runs[0];
        assert_eq!(run.spans.len(), 1);
        let (a, b) = run.spans[0];
        assert_eq!(&tree.src[a..b], b"j += 4");
        assert_eq!(res[0].chunk_plans, vec![ChunkPlan::ReplaceRun(0)]);
    }

    #[test]
    fn statement_list_binding_covers_block_interior() {
        let (res, _) = matches_for(
            "@@\nstatement list SL;\nidentifier f;\n@@\n void f(...)\n {\n SL\n }\n",
            "void a() {\n  x();\n  y();\n}\n",
        );
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "SL"), "x();\n  y();");
    }

    #[test]
    fn chevron_call_maps_configuration() {
        let rule = "@@\nidentifier k;\nexpression b, t, x, y;\nexpression list el;\n@@\n- k<<<b, t, x, y>>>(el);\n+ launch(k, b, t, el);\n";
        let src = "void t() {\n  saxpy<<<blocks, threads, 0, s>>>(dx, dy, n);\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "b"), "blocks");
        assert_eq!(bound(&res[0], "el"), "dx, dy, n");
        let run = &res[0].minus_runs[0];
        let (a, b) = run.spans[0];
        assert_eq!(&tree.src[a..b], b"saxpy<<<blocks, threads, 0, s>>>(dx, dy, n);");
    }

    #[test]
    fn losing_disjunction_branch_chunks_are_dropped() {
        // Each branch rewrites its own call; only the matching branch's chunk
        // survives.
        let rule = "@@\nexpression x;\n@@\n(\n- f(x);\n+ F(x);\n|\n- g(x);\n+ G(x);\n)\n";
        let src = "void t() {\n  g(5);\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        let plans = &res[0].chunk_plans;
        assert_eq!(plans.len(), 2);
        assert_eq!(plans[0], ChunkPlan::Drop);
        match plans[1] {
            ChunkPlan::ReplaceRun(ri) => {
                let (a, b) = res[0].minus_runs[ri].spans[0];
                assert_eq!(&tree.src[a..b], b"g(5);");
            }
            ref other => panic!("expected replace, got {other:?}"),
        }
    }

    #[test]
    fn unroll_normalization_rewrites_each_index_occurrence() {
        let rule = "@@\ntype T;\nidentifier i,l;\nconstant k={4};\nstatement A,B,C,D;\n@@\nfor (T i=0; i+k-1 < l; i+=k)\n{\n  \\( A \\& i+0 \\) \\( B \\&\n-    i+1\n+    i+0\n  \\) \\( C \\&\n-    i+2\n+    i+0\n  \\) \\( D \\&\n-    i+3\n+    i+0\n  \\)\n}\n";
        let src = "void t() {\n  for (int j = 0; j+4-1 < len; j+=4) {\n    out[j+0] = in[j+0];\n    out[j+1] = in[j+1];\n    out[j+2] = in[j+2];\n    out[j+3] = in[j+3];\n  }\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        assert_eq!(bound(&res[0], "i"), "j");
        assert_eq!(bound(&res[0], "T"), "int");
        // Three runs (i+1, i+2, i+3), two occurrences each, all replaced.
        assert_eq!(res[0].minus_runs.len(), 3);
        for (ri, idx) in res[0].minus_runs.iter().zip(1..) {
            assert_eq!(ri.spans.len(), 2);
            for &(a, b) in &ri.spans {
                assert_eq!(&tree.src[a..b], format!("j+{idx}").as_bytes());
            }
        }
        assert_eq!(
            res[0].chunk_plans,
            vec![ChunkPlan::ReplaceRun(0), ChunkPlan::ReplaceRun(1), ChunkPlan::ReplaceRun(2)]
        );
    }

    #[test]
    fn unroll_collapse_deletes_statements_and_rewrites_header() {
        let rule = "@@\ntype T;\nidentifier i,l;\nconstant k={4};\nstatement A,B,C,D;\n@@\n+ #pragma omp unroll partial (4)\n  for (T i=0; i\n-              +k-1\n                    < l ;\n-                         i+=k\n+                         ++i\n                              )\n{\n  \\( A \\& i+0 \\) \\(\n- B \\& i+1\n  \\) \\(\n- C \\& i+2\n  \\) \\(\n- D \\& i+3\n  \\)\n}\n";
        let src = "void t() {\n  for (int j = 0; j+4-1 < len; j+=4) {\n    out[j+0] = in[j+0];\n    out[j+1] = in[j+1];\n    out[j+2] = in[j+2];\n    out[j+3] = in[j+3];\n  }\n}\n";
        let (res, tree) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        let span_texts: Vec<Vec<&[u8]>> = res[0]
            .minus_runs
            .iter()
            .map(|r| r.spans.iter().map(|&(a, b)| &tree.src[a..b]).collect())
            .collect();
        // Header rewrites map to exact subexpressions.
        assert_eq!(span_texts[0], vec![b"+4-1".as_slice()]);
        assert_eq!(span_texts[1], vec![b"j+=4".as_slice()]);
        // Statement deletions take the whole statements; the sibling
        // containment rewrites are subsumed (dead runs).
        assert_eq!(span_texts[2], vec![b"out[j+1] = in[j+1];".as_slice()]);
        assert!(span_texts[3].is_empty());
        assert_eq!(span_texts[4], vec![b"out[j+2] = in[j+2];".as_slice()]);
        assert!(span_texts[5].is_empty());
        assert_eq!(span_texts[6], vec![b"out[j+3] = in[j+3];".as_slice()]);
        assert!(span_texts[7].is_empty());
        // Pragma inserts above the loop; ++i replaces the update run.
        let for_at = src.find("for (int j").unwrap();
        assert_eq!(
            res[0].chunk_plans,
            vec![ChunkPlan::InsertBefore(for_at), ChunkPlan::ReplaceRun(1)]
        );
    }

    #[test]
    fn insert_only_rule_after_include_line() {
        let rule = "@@\n@@\n #include <omp.h>\n+ #include <prof.h>\n";
        let src = "#include <omp.h>\n\nint main() {\n  return 0;\n}\n";
        let (res, _) = matches_for(rule, src);
        assert_eq!(res.len(), 1);
        // Insertion lands after the include's newline (offset of next line).
        assert_eq!(res[0].chunk_plans, vec![ChunkPlan::InsertAfterEnd(src.find("\n").unwrap() + 1)]);
    }
}
