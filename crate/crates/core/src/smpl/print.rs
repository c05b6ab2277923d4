//! Pretty-printer for rule sets, intended for debugging. Printing a parsed
//! rule set and re-parsing the result yields a structurally equal value;
//! pattern bodies are reproduced verbatim from the source.

use super::ast::*;
use std::fmt::Write as _;

pub fn print_rules(rs: &RuleSet) -> String {
    let mut out = String::new();
    for hint in &rs.dialect_hints {
        let _ = writeln!(out, "# spatch {hint}");
    }
    for rule in &rs.rules {
        let anon = rule.name.starts_with("__anon");
        match &rule.kind {
            RuleKind::Patch(p) => {
                let _ = writeln!(out, "@{}{}@", name_part(rule, anon), deps_part(rule));
                for mv in &p.metavars {
                    let _ = writeln!(out, "{}", decl_line(mv));
                }
                let _ = writeln!(out, "@@");
                for line in &p.body.raw {
                    let _ = writeln!(out, "{line}");
                }
            }
            RuleKind::Script(s) => {
                let _ = writeln!(out, "@script:{} {}{}@", s.lang, rule.name, deps_part(rule));
                for imp in &s.imports {
                    let _ = writeln!(out, "{} << {}.{};", imp.local, imp.rule, imp.name);
                }
                for o in &s.outputs {
                    let _ = writeln!(out, "{o};");
                }
                let _ = writeln!(out, "@@");
                for stmt in &s.stmts {
                    let value = expr_text(&stmt.value);
                    let rhs = match stmt.ctor {
                        Some(Ctor::MakeIdent) => format!("cocci.make_ident({value})"),
                        Some(Ctor::MakeType) => format!("cocci.make_type({value})"),
                        Some(Ctor::MakePragmaInfo) => format!("cocci.make_pragmainfo({value})"),
                        None => value,
                    };
                    let _ = writeln!(out, "coccinelle.{} = {rhs};", stmt.target);
                }
            }
            RuleKind::Initialize(init) => {
                let _ = writeln!(out, "@initialize:{}@ @@", init.lang);
                for (name, entries) in &init.tables {
                    let body: Vec<String> =
                        entries.iter().map(|(k, v)| format!("\"{k}\": \"{v}\"")).collect();
                    let _ = writeln!(out, "{name} = {{ {} }}", body.join(", "));
                }
            }
        }
    }
    out
}

fn name_part(rule: &Rule, anon: bool) -> String {
    if anon {
        String::new()
    } else {
        rule.name.clone()
    }
}

fn deps_part(rule: &Rule) -> String {
    if rule.deps.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = rule
        .deps
        .iter()
        .map(|d| match d {
            Dep::Matched(r) => r.clone(),
            Dep::NotMatched(r) => format!("!{r}"),
        })
        .collect();
    format!(" depends on {}", parts.join(" && "))
}

fn decl_line(mv: &MetavarDecl) -> String {
    let mut s = String::new();
    s.push_str(mv.kind.keyword());
    s.push(' ');
    if let Some(from) = &mv.inherited_from {
        s.push_str(from);
        s.push('.');
    }
    s.push_str(&mv.name);
    match &mv.constraint {
        Some(Constraint::Regex(re)) => {
            let _ = write!(s, " =~ \"{}\"", re.as_str());
        }
        Some(Constraint::Set(vals)) => {
            let _ = write!(s, " = {{{}}}", vals.join(","));
        }
        None => {}
    }
    if let Some(tmpl) = &mv.fresh {
        let parts: Vec<String> = tmpl
            .parts
            .iter()
            .map(|p| match p {
                FreshPart::Lit(l) => format!("\"{l}\""),
                FreshPart::Var(v) => v.clone(),
            })
            .collect();
        let _ = write!(s, " = {}", parts.join("##"));
    }
    s.push(';');
    s
}

fn expr_text(e: &ScriptExpr) -> String {
    match e {
        ScriptExpr::Str(s) => format!("\"{s}\""),
        ScriptExpr::Var(v) => v.clone(),
        ScriptExpr::Index { table, key } => format!("{table}[{key}]"),
        ScriptExpr::Concat(parts) => {
            parts.iter().map(expr_text).collect::<Vec<_>>().join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smpl::parser::parse_rules;
    use regex::Regex;

    /// Debug text with source line numbers masked; bodies are reproduced
    /// verbatim so everything else must survive a print/parse round trip.
    fn shape_of(rs: &RuleSet) -> String {
        let re = Regex::new(r"line: \d+").unwrap();
        re.replace_all(&format!("{rs:#?}"), "line: _").into_owned()
    }

    #[test]
    fn parse_print_parse_is_structurally_stable() {
        let src = concat!(
            "# spatch --c++=23\n",
            "@initialize:python@ @@\n",
            "C2HF = { \"curand_uniform_double\":\n",
            "         \"rocrand_uniform_double\" }\n",
            "@cfe@\n",
            "identifier fn;\n",
            "expression list el;\n",
            "position p;\n",
            "@@\n",
            " fn@p(el)\n",
            "@script:python cf2hf@\n",
            "fn << cfe.fn;\n",
            "nf;\n",
            "@@\n",
            "coccinelle.nf = cocci.make_ident(C2HF[fn]);\n",
            "@hfe depends on cfe@\n",
            "identifier cfe.fn;\n",
            "identifier cf2hf.nf;\n",
            "expression list cfe.el;\n",
            "position cfe.p;\n",
            "@@\n",
            "- fn@p\n",
            "+ nf\n",
            "  (el)\n",
            "@@ @@\n",
            "  #pragma omp ...\n",
            "  {\n",
            "  ...\n",
            "+ STOP();\n",
            "  }\n",
        );
        let first = parse_rules(src).expect("first parse");
        let printed = print_rules(&first);
        let second = parse_rules(&printed).expect("printed text should re-parse:\n{printed}");
        assert_eq!(shape_of(&first), shape_of(&second), "printed:\n{printed}");
    }

    #[test]
    fn fresh_templates_survive_round_trip() {
        let src = concat!(
            "@v@\n",
            "type T;\n",
            "identifier f =~ \"kernel\";\n",
            "parameter list PL;\n",
            "statement list SL;\n",
            "fresh identifier f512 = \"avx512_\"##f;\n",
            "@@\n",
            "+ T f512 (PL) { SL }\n",
            "  T f (PL) { SL }\n",
        );
        let first = parse_rules(src).expect("first parse");
        let printed = print_rules(&first);
        let second = parse_rules(&printed).expect("re-parse");
        assert_eq!(shape_of(&first), shape_of(&second));
    }
}
