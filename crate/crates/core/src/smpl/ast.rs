//! Data model for rule files: rule headers, metavariable declarations,
//! script/table rules, and compiled pattern bodies.
//!
//! A pattern body is compiled to a flat list of annotated pattern tokens plus
//! a structural pattern tree whose nodes reference token index ranges. The
//! matcher later maps each pattern token to a byte span of the target file,
//! and every edit (deletion, replacement, insertion) is derived from those
//! spans, so a single mechanism covers whole-statement removal and
//! sub-expression surgery alike.

use regex::Regex;

/// A parsed rule file.
#[derive(Debug)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// Dialect hints from `# spatch --c++[=NN]` comment lines, in file order.
    pub dialect_hints: Vec<String>,
}

#[derive(Debug)]
pub struct Rule {
    pub name: String,
    /// 1-based header line in the rule file.
    pub line: u32,
    pub deps: Vec<Dep>,
    pub kind: RuleKind,
}

/// One conjunct of a `depends on` clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dep {
    Matched(String),
    NotMatched(String),
}

#[derive(Debug)]
pub enum RuleKind {
    Patch(PatchRule),
    Script(ScriptRule),
    Initialize(InitRule),
}

// ----- metavariable declarations --------------------------------------------

#[derive(Debug)]
pub struct PatchRule {
    pub metavars: Vec<MetavarDecl>,
    pub body: PatternBody,
}

#[derive(Debug)]
pub struct MetavarDecl {
    pub name: String,
    pub kind: MetavarKind,
    /// `Some(rule)` when declared as `kind rule.name;`.
    pub inherited_from: Option<String>,
    pub constraint: Option<Constraint>,
    /// Template for `fresh identifier` declarations.
    pub fresh: Option<FreshTemplate>,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetavarKind {
    Type,
    Identifier,
    Function,
    ParameterList,
    Statement,
    StatementList,
    Expression,
    ExpressionList,
    Constant,
    Position,
    Symbol,
    PragmaInfo,
    FreshIdentifier,
}

impl MetavarKind {
    pub fn keyword(self) -> &'static str {
        match self {
            MetavarKind::Type => "type",
            MetavarKind::Identifier => "identifier",
            MetavarKind::Function => "function",
            MetavarKind::ParameterList => "parameter list",
            MetavarKind::Statement => "statement",
            MetavarKind::StatementList => "statement list",
            MetavarKind::Expression => "expression",
            MetavarKind::ExpressionList => "expression list",
            MetavarKind::Constant => "constant",
            MetavarKind::Position => "position",
            MetavarKind::Symbol => "symbol",
            MetavarKind::PragmaInfo => "pragmainfo",
            MetavarKind::FreshIdentifier => "fresh identifier",
        }
    }
}

#[derive(Debug)]
pub enum Constraint {
    /// `=~ "re"` — unanchored match against the candidate's text.
    Regex(Regex),
    /// `= {a,b}` — candidate text must equal one of the listed words.
    Set(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshTemplate {
    pub parts: Vec<FreshPart>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FreshPart {
    Lit(String),
    Var(String),
}

// ----- script and table rules ------------------------------------------------

#[derive(Debug)]
pub struct ScriptRule {
    pub lang: String,
    /// `x << rule.name;` bindings imported into the script.
    pub imports: Vec<ScriptImport>,
    /// Bare `x;` declarations naming values the script exports.
    pub outputs: Vec<String>,
    pub stmts: Vec<ScriptStmt>,
}

#[derive(Debug)]
pub struct ScriptImport {
    pub local: String,
    pub rule: String,
    pub name: String,
    pub line: u32,
}

/// `coccinelle.<target> = <ctor>(<expr>);`
#[derive(Debug)]
pub struct ScriptStmt {
    pub target: String,
    pub ctor: Option<Ctor>,
    pub value: ScriptExpr,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ctor {
    MakeIdent,
    MakeType,
    MakePragmaInfo,
}

#[derive(Debug, PartialEq, Eq)]
pub enum ScriptExpr {
    Str(String),
    Var(String),
    /// `TABLE[var]`
    Index { table: String, key: String },
    /// `a + b + ...` string concatenation.
    Concat(Vec<ScriptExpr>),
}

/// `@initialize:python@` rule: literal dictionary definitions.
#[derive(Debug)]
pub struct InitRule {
    pub lang: String,
    pub tables: Vec<(String, Vec<(String, String)>)>,
}

// ----- pattern bodies ---------------------------------------------------------

/// Index into `PatternBody::tokens`.
pub type PTokId = usize;

#[derive(Debug)]
pub struct PatternBody {
    pub tokens: Vec<PTok>,
    pub chunks: Vec<PlusChunk>,
    pub shape: BodyShape,
    /// Body lines exactly as written (annotations included), for printing.
    pub raw: Vec<String>,
}

/// One significant pattern token from a context or minus line.
#[derive(Debug)]
pub struct PTok {
    pub text: String,
    pub minus: bool,
    /// 0-based body line the token came from.
    pub line: usize,
}

/// A maximal run of consecutive `+` lines.
#[derive(Debug)]
pub struct PlusChunk {
    /// Raw content lines (annotation column stripped).
    pub lines: Vec<String>,
    /// Boundary position: number of pattern tokens before the chunk.
    pub at: usize,
    pub attach: Attach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attach {
    /// Replaces the deletion produced by the minus run ending at `at - 1`.
    Replace,
    /// Inserted at the boundary, before the next matched token (or after the
    /// last one when the chunk closes the body).
    Insert,
}

#[derive(Debug)]
pub enum BodyShape {
    /// Statement/item-level sequence matched against windows of statement
    /// lists (translation unit and every braced block).
    Stmts(Vec<PStmt>),
    /// Expression pattern matched against every expression in the file.
    Expr(PExpr),
}

#[derive(Debug)]
pub enum PStmt {
    /// `...` — zero or more statements.
    Dots { tok: PTokId },
    /// Statement metavariable, optionally with a position marker.
    MetaStmt { name: String, pos: Option<String>, t0: PTokId, t1: PTokId },
    /// Statement-list metavariable (binds the rest of the enclosing block).
    MetaStmtList { name: String, t0: PTokId, t1: PTokId },
    ExprStmt { expr: PExpr, t0: PTokId, t1: PTokId },
    Decl { ty: PExpr, name: PExpr, init: Option<PExpr>, t0: PTokId, t1: PTokId },
    For { init: ForSlot, cond: ForSlot, update: ForSlot, body: Box<PStmt>, t0: PTokId, t1: PTokId },
    RangeFor {
        ty: PExpr,
        byref: bool,
        name: PExpr,
        iter: PExpr,
        body: Box<PStmt>,
        t0: PTokId,
        t1: PTokId,
    },
    If { cond: PExpr, then: Box<PStmt>, t0: PTokId, t1: PTokId },
    While { cond: PExpr, body: Box<PStmt>, t0: PTokId, t1: PTokId },
    Return { value: Option<PExpr>, t0: PTokId, t1: PTokId },
    Break { t0: PTokId, t1: PTokId },
    Compound { stmts: Vec<PStmt>, t0: PTokId, t1: PTokId },
    /// `#pragma` pattern: literal prefix words, then an optional tail.
    Pragma { words: Vec<String>, tail: PragmaTail, t0: PTokId, t1: PTokId },
    /// `#include <...>` / `#include "..."` with the exact target text.
    Include { target: String, t0: PTokId, t1: PTokId },
    FnDef {
        attrs: Vec<PAttr>,
        ret: PExpr,
        name: PExpr,
        params: PParams,
        body: Vec<PStmt>,
        t0: PTokId,
        t1: PTokId,
    },
    /// Column-zero group: disjunction of alternative sequences, or a
    /// conjunction constraining one window.
    Group(PGroup),
}

#[derive(Debug)]
pub enum PragmaTail {
    /// Prefix must be the whole directive.
    None,
    /// `...` — any (possibly empty) remainder.
    Dots,
    /// pragmainfo metavariable binding the remainder.
    Meta(String),
}

#[derive(Debug)]
pub struct PAttr {
    pub name: PExpr,
    pub args: Vec<PArg>,
    pub t0: PTokId,
    pub t1: PTokId,
}

#[derive(Debug)]
pub enum PParams {
    /// `(...)` — any parameter list.
    Dots,
    /// Parameter-list metavariable binding the raw interior.
    Meta(String),
}

#[derive(Debug)]
pub struct PGroup {
    pub kind: GroupKind,
    pub branches: Vec<PBranch>,
    pub t0: PTokId,
    pub t1: PTokId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Disjunction,
    Conjunction,
}

/// One branch of a statement-level group.
#[derive(Debug)]
pub enum PBranch {
    Stmts(Vec<PStmt>),
    /// Expression branch of a conjunction: a containment constraint on the
    /// window matched by the first branch.
    Contains(PExpr),
}

#[derive(Debug)]
pub enum PExpr {
    /// Metavariable occurrence; resolution to a kind happens via the rule's
    /// declarations.
    Metavar { name: String, pos: Option<String>, t0: PTokId },
    /// Literal identifier or keyword.
    Word { text: String, pos: Option<String>, t0: PTokId },
    Lit { text: String, t0: PTokId },
    /// `...` in an expression slot: matches any expression.
    AnyExpr { tok: PTokId },
    Unary { op: String, operand: Box<PExpr>, t0: PTokId, t1: PTokId },
    Postfix { op: String, operand: Box<PExpr>, t0: PTokId, t1: PTokId },
    Binary { op: String, lhs: Box<PExpr>, rhs: Box<PExpr>, t0: PTokId, t1: PTokId },
    Assign { op: String, lhs: Box<PExpr>, rhs: Box<PExpr>, t0: PTokId, t1: PTokId },
    Call { callee: Box<PExpr>, args: Vec<PArg>, t0: PTokId, t1: PTokId },
    Chevron { callee: Box<PExpr>, cfg: Vec<PExpr>, args: Vec<PArg>, t0: PTokId, t1: PTokId },
    Subscript { base: Box<PExpr>, index: Box<PExpr>, t0: PTokId, t1: PTokId },
    CommaSubscript { base: Box<PExpr>, indices: Vec<PExpr>, t0: PTokId, t1: PTokId },
    Member { op: String, base: Box<PExpr>, name: Box<PExpr>, t0: PTokId, t1: PTokId },
    Paren { elems: Vec<PExpr>, t0: PTokId, t1: PTokId },
    /// Inline disjunction `\( a \| b \)`.
    Alt { branches: Vec<PExpr>, t0: PTokId, t1: PTokId },
}

#[derive(Debug)]
pub enum PArg {
    Expr(PExpr),
    /// `...` — zero or more arguments.
    Dots { tok: PTokId },
    /// Expression-list metavariable binding a run of arguments.
    MetaList { name: String, t0: PTokId },
}

impl PExpr {
    pub fn tok_range(&self) -> (PTokId, PTokId) {
        match self {
            PExpr::Metavar { t0, .. }
            | PExpr::Word { t0, .. }
            | PExpr::Lit { t0, .. }
            | PExpr::AnyExpr { tok: t0 } => (*t0, *t0),
            PExpr::Unary { t0, t1, .. }
            | PExpr::Postfix { t0, t1, .. }
            | PExpr::Binary { t0, t1, .. }
            | PExpr::Assign { t0, t1, .. }
            | PExpr::Call { t0, t1, .. }
            | PExpr::Chevron { t0, t1, .. }
            | PExpr::Subscript { t0, t1, .. }
            | PExpr::CommaSubscript { t0, t1, .. }
            | PExpr::Member { t0, t1, .. }
            | PExpr::Paren { t0, t1, .. }
            | PExpr::Alt { t0, t1, .. } => (*t0, *t1),
        }
    }
}

impl PStmt {
    pub fn tok_range(&self) -> (PTokId, PTokId) {
        match self {
            PStmt::Dots { tok } => (*tok, *tok),
            PStmt::MetaStmt { t0, t1, .. }
            | PStmt::MetaStmtList { t0, t1, .. }
            | PStmt::ExprStmt { t0, t1, .. }
            | PStmt::Decl { t0, t1, .. }
            | PStmt::For { t0, t1, .. }
            | PStmt::RangeFor { t0, t1, .. }
            | PStmt::If { t0, t1, .. }
            | PStmt::While { t0, t1, .. }
            | PStmt::Return { t0, t1, .. }
            | PStmt::Break { t0, t1, .. }
            | PStmt::Compound { t0, t1, .. }
            | PStmt::Pragma { t0, t1, .. }
            | PStmt::Include { t0, t1, .. }
            | PStmt::FnDef { t0, t1, .. } => (*t0, *t1),
            PStmt::Group(g) => (g.t0, g.t1),
        }
    }
}

/// Slot of a `for (init; cond; update)` header pattern.
#[derive(Debug)]
pub enum ForSlot {
    /// `...` — anything, including an empty slot.
    Dots { tok: PTokId },
    Expr(PExpr),
    /// `T i = e` declaration form in the init slot.
    Decl { ty: PExpr, name: PExpr, init: Option<PExpr>, t0: PTokId, t1: PTokId },
    Empty,
}

impl RuleSet {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }
}

impl Rule {
    pub fn patch(&self) -> Option<&PatchRule> {
        match &self.kind {
            RuleKind::Patch(p) => Some(p),
            _ => None,
        }
    }

    pub fn metavar(&self, name: &str) -> Option<&MetavarDecl> {
        match &self.kind {
            RuleKind::Patch(p) => p.metavars.iter().find(|m| m.name == name),
            _ => None,
        }
    }
}
