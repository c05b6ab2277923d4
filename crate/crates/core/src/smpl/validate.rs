//! Rule-set validation. Produces diagnostics; never fails outright.
//!
//! Rules run strictly in file order, so any dependency or inheritance that
//! points at a rule declared later (or at the rule itself) is unsatisfiable;
//! that check also rules out dependency cycles.

use super::ast::*;
use crate::c_frontend::lexer::{lex, TokenKind};
use crate::diagnostics::Diagnostic;

pub fn validate_rules(rs: &RuleSet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen: Vec<&Rule> = Vec::new();

    for rule in &rs.rules {
        if seen.iter().any(|r| r.name == rule.name) {
            out.push(diag(rule.line, format!("duplicate rule name `{}`", rule.name)));
        }
        for dep in &rule.deps {
            let target = match dep {
                Dep::Matched(n) | Dep::NotMatched(n) => n,
            };
            if !seen.iter().any(|r| r.name == *target) {
                out.push(diag(
                    rule.line,
                    format!(
                        "rule `{}` depends on `{target}`, which does not run before it",
                        rule.name
                    ),
                ));
            }
        }
        match &rule.kind {
            RuleKind::Patch(p) => validate_patch(rule, p, &seen, &mut out),
            RuleKind::Script(s) => validate_script(rule, s, rs, &seen, &mut out),
            RuleKind::Initialize(_) => {}
        }
        seen.push(rule);
    }
    out
}

fn diag(line: u32, message: String) -> Diagnostic {
    Diagnostic { line, message }
}

/// True when `rule` (already scheduled) can provide a binding named `name`.
fn provides(rule: &Rule, name: &str) -> bool {
    match &rule.kind {
        RuleKind::Patch(p) => p.metavars.iter().any(|m| m.name == name),
        RuleKind::Script(s) => s.outputs.iter().any(|o| o == name),
        RuleKind::Initialize(_) => false,
    }
}

fn validate_patch(rule: &Rule, p: &PatchRule, seen: &[&Rule], out: &mut Vec<Diagnostic>) {
    for mv in &p.metavars {
        if let Some(from) = &mv.inherited_from {
            match seen.iter().find(|r| r.name == *from) {
                None => out.push(diag(
                    mv.line,
                    format!("metavariable `{}` inherits from unknown rule `{from}`", mv.name),
                )),
                Some(r) if !provides(r, &mv.name) => out.push(diag(
                    mv.line,
                    format!("rule `{from}` does not bind a metavariable `{}`", mv.name),
                )),
                _ => {}
            }
        }
        if let Some(tmpl) = &mv.fresh {
            for part in &tmpl.parts {
                if let FreshPart::Var(v) = part {
                    if !p.metavars.iter().any(|m| m.name == *v) {
                        out.push(diag(
                            mv.line,
                            format!(
                                "fresh identifier `{}` uses undeclared metavariable `{v}`",
                                mv.name
                            ),
                        ));
                    }
                }
            }
        }
    }

    // plus lines must not contain statement dots
    for chunk in &p.body.chunks {
        for line in &chunk.lines {
            let toks = lex(line.as_bytes());
            if toks.iter().any(|t| {
                t.kind == TokenKind::Punct && t.text(line.as_bytes()) == b"..."
            }) {
                out.push(diag(rule.line, format!("plus line contains `...`: `{}`", line.trim())));
            }
        }
    }

    // positions attached with `@p` must be declared position metavariables
    let mut positions = Vec::new();
    if let BodyShape::Stmts(stmts) = &p.body.shape {
        for s in stmts {
            collect_stmt_positions(s, &mut positions);
        }
    } else if let BodyShape::Expr(e) = &p.body.shape {
        collect_expr_positions(e, &mut positions);
    }
    for pos in positions {
        let ok = p
            .metavars
            .iter()
            .any(|m| m.name == pos && m.kind == MetavarKind::Position);
        if !ok {
            out.push(diag(
                rule.line,
                format!("`@{pos}` does not name a declared position metavariable"),
            ));
        }
    }
}

fn validate_script(
    rule: &Rule,
    s: &ScriptRule,
    rs: &RuleSet,
    seen: &[&Rule],
    out: &mut Vec<Diagnostic>,
) {
    for imp in &s.imports {
        match seen.iter().find(|r| r.name == imp.rule) {
            None => out.push(diag(
                imp.line,
                format!("script input `{}` references unknown rule `{}`", imp.local, imp.rule),
            )),
            Some(r) if !provides(r, &imp.name) => out.push(diag(
                imp.line,
                format!("rule `{}` does not bind a metavariable `{}`", imp.rule, imp.name),
            )),
            _ => {}
        }
    }
    let table_names: Vec<&str> = rs
        .rules
        .iter()
        .filter_map(|r| match &r.kind {
            RuleKind::Initialize(init) => Some(init.tables.iter().map(|(n, _)| n.as_str())),
            _ => None,
        })
        .flatten()
        .collect();
    for stmt in &s.stmts {
        if !s.outputs.iter().any(|o| o == &stmt.target) {
            out.push(diag(
                stmt.line,
                format!("script assigns `{}`, which is not a declared output", stmt.target),
            ));
        }
        check_script_expr(rule, &stmt.value, s, &table_names, stmt.line, out);
    }
}

fn check_script_expr(
    rule: &Rule,
    e: &ScriptExpr,
    s: &ScriptRule,
    tables: &[&str],
    line: u32,
    out: &mut Vec<Diagnostic>,
) {
    match e {
        ScriptExpr::Str(_) => {}
        ScriptExpr::Var(v) => {
            if !s.imports.iter().any(|i| i.local == *v) {
                out.push(diag(
                    line,
                    format!("script in rule `{}` uses unbound name `{v}`", rule.name),
                ));
            }
        }
        ScriptExpr::Index { table, key } => {
            if !tables.contains(&table.as_str()) {
                out.push(diag(line, format!("unknown table `{table}`")));
            }
            if !s.imports.iter().any(|i| i.local == *key) {
                out.push(diag(line, format!("table key `{key}` is not a script input")));
            }
        }
        ScriptExpr::Concat(parts) => {
            for p in parts {
                check_script_expr(rule, p, s, tables, line, out);
            }
        }
    }
}

fn collect_stmt_positions(s: &PStmt, out: &mut Vec<String>) {
    match s {
        PStmt::MetaStmt { pos, .. } => {
            if let Some(p) = pos {
                out.push(p.clone());
            }
        }
        PStmt::ExprStmt { expr, .. } => collect_expr_positions(expr, out),
        PStmt::Decl { ty, name, init, .. } => {
            collect_expr_positions(ty, out);
            collect_expr_positions(name, out);
            if let Some(i) = init {
                collect_expr_positions(i, out);
            }
        }
        PStmt::For { init, cond, update, body, .. } => {
            for slot in [init, cond, update] {
                collect_slot_positions(slot, out);
            }
            collect_stmt_positions(body, out);
        }
        PStmt::RangeFor { ty, name, iter, body, .. } => {
            collect_expr_positions(ty, out);
            collect_expr_positions(name, out);
            collect_expr_positions(iter, out);
            collect_stmt_positions(body, out);
        }
        PStmt::If { cond, then, .. } => {
            collect_expr_positions(cond, out);
            collect_stmt_positions(then, out);
        }
        PStmt::While { cond, body, .. } => {
            collect_expr_positions(cond, out);
            collect_stmt_positions(body, out);
        }
        PStmt::Return { value, .. } => {
            if let Some(v) = value {
                collect_expr_positions(v, out);
            }
        }
        PStmt::Compound { stmts, .. } => {
            for s in stmts {
                collect_stmt_positions(s, out);
            }
        }
        PStmt::FnDef { attrs, ret, name, body, .. } => {
            for a in attrs {
                collect_expr_positions(&a.name, out);
                for arg in &a.args {
                    collect_arg_positions(arg, out);
                }
            }
            collect_expr_positions(ret, out);
            collect_expr_positions(name, out);
            for s in body {
                collect_stmt_positions(s, out);
            }
        }
        PStmt::Group(g) => {
            for b in &g.branches {
                match b {
                    PBranch::Stmts(ss) => {
                        for s in ss {
                            collect_stmt_positions(s, out);
                        }
                    }
                    PBranch::Contains(e) => collect_expr_positions(e, out),
                }
            }
        }
        PStmt::Dots { .. }
        | PStmt::MetaStmtList { .. }
        | PStmt::Break { .. }
        | PStmt::Pragma { .. }
        | PStmt::Include { .. } => {}
    }
}

fn collect_slot_positions(slot: &ForSlot, out: &mut Vec<String>) {
    match slot {
        ForSlot::Expr(e) => collect_expr_positions(e, out),
        ForSlot::Decl { ty, name, init, .. } => {
            collect_expr_positions(ty, out);
            collect_expr_positions(name, out);
            if let Some(i) = init {
                collect_expr_positions(i, out);
            }
        }
        ForSlot::Dots { .. } | ForSlot::Empty => {}
    }
}

fn collect_arg_positions(arg: &PArg, out: &mut Vec<String>) {
    match arg {
        PArg::Expr(e) => collect_expr_positions(e, out),
        PArg::Dots { .. } | PArg::MetaList { .. } => {}
    }
}

fn collect_expr_positions(e: &PExpr, out: &mut Vec<String>) {
    match e {
        PExpr::Metavar { pos, .. } | PExpr::Word { pos, .. } => {
            if let Some(p) = pos {
                out.push(p.clone());
            }
        }
        PExpr::Lit { .. } | PExpr::AnyExpr { .. } => {}
        PExpr::Unary { operand, .. } | PExpr::Postfix { operand, .. } => {
            collect_expr_positions(operand, out)
        }
        PExpr::Binary { lhs, rhs, .. } | PExpr::Assign { lhs, rhs, .. } => {
            collect_expr_positions(lhs, out);
            collect_expr_positions(rhs, out);
        }
        PExpr::Call { callee, args, .. } => {
            collect_expr_positions(callee, out);
            for a in args {
                collect_arg_positions(a, out);
            }
        }
        PExpr::Chevron { callee, cfg, args, .. } => {
            collect_expr_positions(callee, out);
            for c in cfg {
                collect_expr_positions(c, out);
            }
            for a in args {
                collect_arg_positions(a, out);
            }
        }
        PExpr::Subscript { base, index, .. } => {
            collect_expr_positions(base, out);
            collect_expr_positions(index, out);
        }
        PExpr::CommaSubscript { base, indices, .. } => {
            collect_expr_positions(base, out);
            for i in indices {
                collect_expr_positions(i, out);
            }
        }
        PExpr::Member { base, name, .. } => {
            collect_expr_positions(base, out);
            collect_expr_positions(name, out);
        }
        PExpr::Paren { elems, .. } => {
            for e in elems {
                collect_expr_positions(e, out);
            }
        }
        PExpr::Alt { branches, .. } => {
            for b in branches {
                collect_expr_positions(b, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smpl::parser::parse_rules;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate_rules(&parse_rules(src).expect("should parse"))
    }

    #[test]
    fn clean_rule_set_has_no_diagnostics() {
        let d = diags(concat!(
            "@rl@\n",
            "identifier x;\n",
            "@@\n",
            "- f(x);\n",
            "@ah depends on rl@\n",
            "@@\n",
            "  #include <iostream>\n",
            "+ #include <algorithm>\n",
        ));
        assert!(d.is_empty(), "unexpected diagnostics: {d:?}");
    }

    #[test]
    fn unknown_inherited_rule_reported() {
        let d = diags("@d@\ntype c.T;\n@@\n  T x;\n");
        assert!(d.iter().any(|x| x.message.contains("unknown rule `c`")), "{d:?}");
    }

    #[test]
    fn forward_dependency_reported() {
        let d = diags("@a depends on b@\n@@\n- f();\n@b@\n@@\n- g();\n");
        assert!(d.iter().any(|x| x.message.contains("does not run before")), "{d:?}");
    }

    #[test]
    fn plus_line_with_dots_reported() {
        let d = diags("@r@\nexpression x;\n@@\n- f(x)\n+ g(...)\n");
        assert!(d.iter().any(|x| x.message.contains("plus line contains `...`")), "{d:?}");
    }

    #[test]
    fn undeclared_position_reported() {
        let d = diags("@r@\nidentifier fn;\nexpression list el;\n@@\n fn@p(el)\n");
        assert!(d.iter().any(|x| x.message.contains("`@p`")), "{d:?}");
    }

    #[test]
    fn script_table_and_import_checks() {
        let d = diags(concat!(
            "@cfe@\n",
            "identifier fn;\n",
            "@@\n",
            " fn(...)\n",
            "@script:python s@\n",
            "fn << cfe.fn;\n",
            "nf;\n",
            "@@\n",
            "coccinelle.nf = cocci.make_ident(NOPE[fn]);\n",
        ));
        assert!(d.iter().any(|x| x.message.contains("unknown table `NOPE`")), "{d:?}");
    }

    #[test]
    fn inherited_metavar_must_exist_in_source_rule() {
        let d = diags(concat!(
            "@c@\n",
            "type T;\n",
            "@@\n",
            "- T x;\n",
            "@d@\n",
            "type c.T;\n",
            "function c.f;\n",
            "@@\n",
            "  T f (...) { ... }\n",
        ));
        assert!(
            d.iter().any(|x| x.message.contains("does not bind a metavariable `f`")),
            "{d:?}"
        );
    }
}
