//! Evaluation of table rules and the embedded script subset.
//!
//! Script rules read inherited bindings, perform string operations and table
//! lookups, and export new bindings for later rules. A failed table lookup is
//! not an error: it drops the candidate environment (with a warning), so a
//! rule chain simply does not fire for names the tables do not cover.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{Error, Warning};
use crate::smpl::{Ctor, FreshPart, FreshTemplate, InitRule, ScriptExpr, ScriptRule};

use super::binding::{BoundValue, Env};

/// Merged lookup tables from all table-definition rules.
pub type Tables = BTreeMap<String, BTreeMap<String, String>>;

pub fn merge_tables(into: &mut Tables, init: &InitRule) {
    for (name, pairs) in &init.tables {
        let table = into.entry(name.clone()).or_default();
        for (k, v) in pairs {
            table.insert(k.clone(), v.clone());
        }
    }
}

/// Evaluates a script rule against one candidate environment.
///
/// Returns the exported `(name, value)` pairs, or `None` when a table lookup
/// missed and the environment is dropped.
pub fn eval_script(
    rule: &str,
    script: &ScriptRule,
    env: &Env,
    tables: &Tables,
    warnings: &mut Vec<Warning>,
) -> Result<Option<Vec<(String, BoundValue)>>, Error> {
    let mut scope: BTreeMap<&str, String> = BTreeMap::new();
    for imp in &script.imports {
        let value = env.get(&imp.rule, &imp.name).ok_or_else(|| Error::Script {
            rule: rule.to_string(),
            message: format!("no binding for {}.{}", imp.rule, imp.name),
        })?;
        let text = match value {
            BoundValue::Text { text, .. } => text.clone(),
            BoundValue::Position { offset } => offset.to_string(),
        };
        scope.insert(imp.local.as_str(), text);
    }

    let mut exports: Vec<(String, BoundValue)> = Vec::new();
    for stmt in &script.stmts {
        let value = match eval_expr(rule, &stmt.value, &scope, tables, warnings)? {
            Some(v) => v,
            None => return Ok(None),
        };
        check_ctor(rule, stmt.ctor, &stmt.value, &value)?;
        scope.insert(stmt.target.as_str(), value.clone());
        exports.push((stmt.target.clone(), BoundValue::from_text(&value)));
    }

    // Declared outputs must all have been assigned.
    for out in &script.outputs {
        if !exports.iter().any(|(n, _)| n == out) {
            return Err(Error::Script {
                rule: rule.to_string(),
                message: format!("output `{out}` was never assigned"),
            });
        }
    }
    Ok(Some(exports))
}

fn eval_expr(
    rule: &str,
    expr: &ScriptExpr,
    scope: &BTreeMap<&str, String>,
    tables: &Tables,
    warnings: &mut Vec<Warning>,
) -> Result<Option<String>, Error> {
    match expr {
        ScriptExpr::Str(s) => Ok(Some(s.clone())),
        ScriptExpr::Var(v) => scope.get(v.as_str()).cloned().map(Some).ok_or_else(|| {
            Error::Script {
                rule: rule.to_string(),
                message: format!("unknown variable `{v}`"),
            }
        }),
        ScriptExpr::Index { table, key } => {
            let t = tables.get(table).ok_or_else(|| Error::Script {
                rule: rule.to_string(),
                message: format!("unknown table `{table}`"),
            })?;
            let key_value = scope.get(key.as_str()).ok_or_else(|| Error::Script {
                rule: rule.to_string(),
                message: format!("unknown variable `{key}`"),
            })?;
            match t.get(key_value) {
                Some(v) => Ok(Some(v.clone())),
                None => {
                    warnings.push(Warning::ScriptTableMiss {
                        rule: rule.to_string(),
                        table: table.clone(),
                        key: key_value.clone(),
                    });
                    Ok(None)
                }
            }
        }
        ScriptExpr::Concat(parts) => {
            let mut s = String::new();
            for p in parts {
                match eval_expr(rule, p, scope, tables, warnings)? {
                    Some(v) => s.push_str(&v),
                    None => return Ok(None),
                }
            }
            Ok(Some(s))
        }
    }
}

/// Constructor argument checks. Identifier construction from a looked-up or
/// imported value must yield a lexical identifier; literal strings and
/// concatenations are passed through as written, which is how rule authors
/// deliberately smuggle richer text into an identifier slot.
fn check_ctor(rule: &str, ctor: Option<Ctor>, expr: &ScriptExpr, value: &str) -> Result<(), Error> {
    let literalish = matches!(expr, ScriptExpr::Str(_) | ScriptExpr::Concat(_));
    match ctor {
        Some(Ctor::MakeIdent) if !literalish && !is_identifier(value) => Err(Error::Script {
            rule: rule.to_string(),
            message: format!("`{value}` is not an identifier"),
        }),
        Some(Ctor::MakeType) if value.trim().is_empty() => Err(Error::Script {
            rule: rule.to_string(),
            message: "empty type name".to_string(),
        }),
        _ => Ok(()),
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Instantiates a fresh-identifier template, renaming on collision with any
/// name in `used` (source identifiers plus previously generated names).
pub fn gen_fresh(
    rule: &str,
    template: &FreshTemplate,
    lookup: impl Fn(&str) -> Option<String>,
    used: &mut BTreeSet<String>,
) -> Result<String, Error> {
    let mut base = String::new();
    for part in &template.parts {
        match part {
            FreshPart::Lit(s) => base.push_str(s),
            FreshPart::Var(v) => {
                let text = lookup(v).ok_or_else(|| Error::Script {
                    rule: rule.to_string(),
                    message: format!("fresh identifier template uses unbound `{v}`"),
                })?;
                base.push_str(&text);
            }
        }
    }
    if !is_identifier(&base) {
        return Err(Error::Script {
            rule: rule.to_string(),
            message: format!("fresh identifier `{base}` is not a valid identifier"),
        });
    }
    let mut name = base.clone();
    let mut n = 0;
    while used.contains(&name) {
        n += 1;
        name = format!("{base}_{n}");
    }
    used.insert(name.clone());
    Ok(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smpl::parse_rules;

    fn tables_from(src: &str) -> Tables {
        let rs = parse_rules(src).unwrap();
        let mut t = Tables::new();
        for r in &rs.rules {
            if let crate::smpl::RuleKind::Initialize(init) = &r.kind {
                merge_tables(&mut t, init);
            }
        }
        t
    }

    fn script_from(src: &str) -> (String, ScriptRule) {
        let rs = parse_rules(src).unwrap();
        for r in rs.rules {
            if let crate::smpl::RuleKind::Script(s) = r.kind {
                return (r.name, s);
            }
        }
        panic!("no script rule in source");
    }

    const TABLE_SRC: &str = "@initialize:python@\n@@\n\nC2H = { \"curand_uniform_double\":\n        \"rocrand_uniform_double\" }\n";

    #[test]
    fn table_lookup_exports_binding() {
        let tables = tables_from(TABLE_SRC);
        let (name, script) = script_from(
            "@fe@\nidentifier fn;\n@@\n fn(...)\n\n@script:python nfr@\nfn << fe.fn;\nnf;\n@@\ncoccinelle.nf = cocci.make_ident(C2H[fn]);\n",
        );
        let mut env = Env::default();
        env.set("fe", "fn", BoundValue::from_text("curand_uniform_double"));
        let mut warnings = Vec::new();
        let out = eval_script(&name, &script, &env, &tables, &mut warnings)
            .unwrap()
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, "nf");
        assert_eq!(out[0].1.text(), Some("rocrand_uniform_double"));
        assert!(warnings.is_empty());
    }

    #[test]
    fn table_miss_drops_environment_with_warning() {
        let tables = tables_from(TABLE_SRC);
        let (name, script) = script_from(
            "@fe@\nidentifier fn;\n@@\n fn(...)\n\n@script:python nfr@\nfn << fe.fn;\nnf;\n@@\ncoccinelle.nf = cocci.make_ident(C2H[fn]);\n",
        );
        let mut env = Env::default();
        env.set("fe", "fn", BoundValue::from_text("printf"));
        let mut warnings = Vec::new();
        let out = eval_script(&name, &script, &env, &tables, &mut warnings).unwrap();
        assert!(out.is_none());
        assert!(matches!(
            &warnings[..],
            [Warning::ScriptTableMiss { table, key, .. }] if table == "C2H" && key == "printf"
        ));
    }

    #[test]
    fn concatenation_bypasses_identifier_check() {
        let (name, script) = script_from(
            "@fb@\nidentifier i;\nstatement s;\n@@\n s\n\n@script:python wrap@\ni << fb.i;\nb << fb.s;\nlb;\n@@\ncoccinelle.lb = cocci.make_ident(\"KOKKOS_LAMBDA(const int \" + i + \")\" + b);\n",
        );
        let mut env = Env::default();
        env.set("fb", "i", BoundValue::from_text("i"));
        env.set("fb", "s", BoundValue::from_text("{ y[i] += a * x[i]; }"));
        let mut warnings = Vec::new();
        let out = eval_script(&name, &script, &env, &Tables::new(), &mut warnings)
            .unwrap()
            .unwrap();
        assert_eq!(
            out[0].1.text(),
            Some("KOKKOS_LAMBDA(const int i){ y[i] += a * x[i]; }")
        );
    }

    #[test]
    fn looked_up_identifier_must_be_lexical() {
        let mut tables = Tables::new();
        tables.insert(
            "T".to_string(),
            BTreeMap::from([("k".to_string(), "not an ident".to_string())]),
        );
        let (name, script) = script_from(
            "@fe@\nidentifier fn;\n@@\n fn(...)\n\n@script:python bad@\nfn << fe.fn;\nnf;\n@@\ncoccinelle.nf = cocci.make_ident(T[fn]);\n",
        );
        let mut env = Env::default();
        env.set("fe", "fn", BoundValue::from_text("k"));
        let mut warnings = Vec::new();
        let err = eval_script(&name, &script, &env, &tables, &mut warnings).unwrap_err();
        assert!(matches!(err, Error::Script { .. }));
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let template = FreshTemplate {
            parts: vec![FreshPart::Var("f".into()), FreshPart::Lit("_v".into())],
        };
        let lookup = |v: &str| (v == "f").then(|| "saxpy".to_string());
        let mut used: BTreeSet<String> = ["saxpy_v".to_string()].into_iter().collect();
        let a = gen_fresh("r", &template, lookup, &mut used).unwrap();
        assert_eq!(a, "saxpy_v_1");
        let b = gen_fresh("r", &template, lookup, &mut used).unwrap();
        assert_eq!(b, "saxpy_v_2");
        assert!(used.contains("saxpy_v_1") && used.contains("saxpy_v_2"));
    }
}
