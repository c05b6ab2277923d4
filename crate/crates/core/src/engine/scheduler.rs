//! Sequential rule scheduling over one source file.
//!
//! Rules run in file order. Each rule sees the source as left by the rules
//! before it (edits are applied and the file re-parsed between rules). A rule
//! that inherits metavariables is driven once per environment exported by the
//! most recently scheduled rule it inherits from; surviving environments are
//! re-exported for rules further down the file.

use std::collections::BTreeSet;

use crate::c_frontend::parse;
use crate::diagnostics::{Error, Warning};
use crate::smpl::{Dep, MetavarDecl, PatchRule, Rule, RuleKind, RuleSet};
use crate::transform::{apply_edits, edits_for_match, Edit};

use super::binding::{BoundValue, Env};
use super::matcher::match_rule;
use super::script::{eval_script, gen_fresh, merge_tables, Tables};

/// Per-rule summary of one file run.
#[derive(Debug)]
pub struct RuleOutcome {
    pub name: String,
    pub matched: bool,
    /// Distinct match sites (patch rules) or surviving environments (script
    /// rules) this rule produced.
    pub match_count: usize,
}

#[derive(Debug)]
pub struct RunResult {
    pub output: Vec<u8>,
    pub warnings: Vec<Warning>,
    pub outcomes: Vec<RuleOutcome>,
}

/// Runs every rule of `rules` over `src` and returns the rewritten bytes.
pub fn run_rules(rules: &RuleSet, src: &[u8], file: &str) -> Result<RunResult, Error> {
    let mut text = src.to_vec();
    let mut tree = parse(&text, file)?;
    let mut tables = Tables::new();
    let mut warnings = Vec::new();
    let mut outcomes: Vec<RuleOutcome> = Vec::new();
    let mut envs_by_rule: Vec<Vec<Env>> = Vec::new();
    let mut used_idents: BTreeSet<String> = ident_set(&tree);

    for rule in &rules.rules {
        let deps_ok = rule.deps.iter().all(|d| dep_satisfied(d, &outcomes));
        if !deps_ok {
            outcomes.push(RuleOutcome {
                name: rule.name.clone(),
                matched: false,
                match_count: 0,
            });
            envs_by_rule.push(Vec::new());
            continue;
        }
        match &rule.kind {
            RuleKind::Initialize(init) => {
                merge_tables(&mut tables, init);
                outcomes.push(RuleOutcome {
                    name: rule.name.clone(),
                    matched: true,
                    match_count: 0,
                });
                envs_by_rule.push(Vec::new());
            }
            RuleKind::Script(script) => {
                let drivers = driver_envs(
                    script.imports.iter().map(|i| i.rule.as_str()),
                    &outcomes,
                    &envs_by_rule,
                );
                let mut survivors = Vec::new();
                for env in drivers {
                    if let Some(outputs) =
                        eval_script(&rule.name, script, &env, &tables, &mut warnings)?
                    {
                        let mut env = env;
                        for (name, value) in outputs {
                            env.set(&rule.name, &name, value);
                        }
                        survivors.push(env);
                    }
                }
                outcomes.push(RuleOutcome {
                    name: rule.name.clone(),
                    matched: !survivors.is_empty(),
                    match_count: survivors.len(),
                });
                envs_by_rule.push(survivors);
            }
            RuleKind::Patch(patch) => {
                let (survivors, edits) = run_patch_rule(
                    rule, patch, &tree, &outcomes, &envs_by_rule, &mut used_idents,
                )?;
                let count = survivors.len();
                if !edits.is_empty() {
                    let (new_text, mut w) = apply_edits(&text, edits, &rule.name);
                    warnings.append(&mut w);
                    tree = parse(&new_text, file).map_err(|inner| Error::PostTransformParse {
                        rule: rule.name.clone(),
                        inner: Box::new(inner),
                    })?;
                    text = new_text;
                    used_idents.extend(ident_set(&tree));
                }
                outcomes.push(RuleOutcome {
                    name: rule.name.clone(),
                    matched: count > 0,
                    match_count: count,
                });
                envs_by_rule.push(survivors);
            }
        }
    }
    Ok(RunResult {
        output: text,
        warnings,
        outcomes,
    })
}

fn ident_set(tree: &crate::c_frontend::SyntaxTree) -> BTreeSet<String> {
    tree.ident_texts()
        .into_iter()
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .collect()
}

fn dep_satisfied(dep: &Dep, outcomes: &[RuleOutcome]) -> bool {
    let flag = |name: &str| {
        outcomes
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.matched)
            .unwrap_or(false)
    };
    match dep {
        Dep::Matched(r) => flag(r),
        Dep::NotMatched(r) => !flag(r),
    }
}

/// Environments the rule is driven by: those exported by the most recently
/// scheduled rule it inherits from, or one empty environment when the rule
/// inherits nothing.
fn driver_envs<'a>(
    inherited: impl Iterator<Item = &'a str>,
    outcomes: &[RuleOutcome],
    envs_by_rule: &[Vec<Env>],
) -> Vec<Env> {
    let latest = inherited
        .filter_map(|name| outcomes.iter().rposition(|o| o.name == name))
        .max();
    match latest {
        Some(i) => envs_by_rule[i].clone(),
        None => vec![Env::default()],
    }
}

fn run_patch_rule(
    rule: &Rule,
    patch: &PatchRule,
    tree: &crate::c_frontend::SyntaxTree,
    outcomes: &[RuleOutcome],
    envs_by_rule: &[Vec<Env>],
    used_idents: &mut BTreeSet<String>,
) -> Result<(Vec<Env>, Vec<Edit>), Error> {
    let inherited: Vec<&MetavarDecl> = patch
        .metavars
        .iter()
        .filter(|d| d.inherited_from.is_some())
        .collect();
    let drivers = driver_envs(
        inherited.iter().map(|d| d.inherited_from.as_deref().unwrap()),
        outcomes,
        envs_by_rule,
    );

    let mut survivors = Vec::new();
    let mut all_edits = Vec::new();
    let mut seen: BTreeSet<((usize, usize), Vec<(usize, usize, Vec<u8>)>)> = BTreeSet::new();
    for env in drivers {
        let mut seed = Vec::new();
        let mut seedable = true;
        for d in &inherited {
            let from = d.inherited_from.as_deref().unwrap();
            match env.get(from, &d.name) {
                Some(v) => seed.push((d.name.clone(), v.clone())),
                None => {
                    seedable = false;
                    break;
                }
            }
        }
        if !seedable {
            continue;
        }
        for mut m in match_rule(tree, patch, &seed) {
            for d in &patch.metavars {
                let Some(template) = &d.fresh else { continue };
                let bindings = &m.bindings;
                let name = gen_fresh(
                    &rule.name,
                    template,
                    |v| {
                        bindings
                            .iter()
                            .find(|(n, _)| n == v)
                            .and_then(|(_, val)| val.text().map(str::to_string))
                    },
                    used_idents,
                )?;
                m.bindings.push((d.name.clone(), BoundValue::from_text(&name)));
            }
            let edits = edits_for_match(&tree.src, &rule.name, patch, &m)?;
            let key = (
                m.site,
                edits
                    .iter()
                    .map(|e| (e.start, e.end, e.text.clone()))
                    .collect(),
            );
            // Two driver environments can rediscover the same rewrite; keep one.
            if !seen.insert(key) {
                continue;
            }
            let mut out = env.clone();
            for (name, value) in &m.bindings {
                let owner = patch
                    .metavars
                    .iter()
                    .find(|d| &d.name == name)
                    .and_then(|d| d.inherited_from.as_deref())
                    .unwrap_or(&rule.name);
                out.set(owner, name, value.clone());
            }
            survivors.push(out);
            all_edits.extend(edits);
        }
    }
    Ok((survivors, all_edits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smpl::parse_rules;

    fn run(rules: &str, src: &str) -> RunResult {
        let rs = parse_rules(rules).unwrap();
        run_rules(&rs, src.as_bytes(), "t.c").unwrap()
    }

    #[test]
    fn rules_see_the_previous_rules_output() {
        let rules = "@a@\n@@\n- old();\n+ mid();\n\n@b@\n@@\n- mid();\n+ new();\n";
        let r = run(rules, "void f(void)\n{\n    old();\n}\n");
        assert_eq!(
            String::from_utf8_lossy(&r.output),
            "void f(void)\n{\n    new();\n}\n"
        );
        assert!(r.outcomes.iter().all(|o| o.matched));
    }

    #[test]
    fn dependency_gates_in_both_directions() {
        let rules = "@probe@\n@@\n marker();\n\n@hit depends on probe@\n@@\n- a();\n+ b();\n\n@miss depends on !probe@\n@@\n- a();\n+ c();\n";
        let with = run(rules, "void f(void)\n{\n    marker();\n    a();\n}\n");
        assert!(String::from_utf8_lossy(&with.output).contains("b();"));
        let without = run(rules, "void f(void)\n{\n    a();\n}\n");
        assert!(String::from_utf8_lossy(&without.output).contains("c();"));
    }

    #[test]
    fn unsatisfied_dependency_counts_as_unmatched() {
        let rules = "@probe@\n@@\n marker();\n\n@mid depends on probe@\n@@\n- a();\n+ b();\n\n@tail depends on mid@\n@@\n- x();\n+ y();\n";
        let r = run(rules, "void f(void)\n{\n    a();\n    x();\n}\n");
        let text = String::from_utf8_lossy(&r.output);
        assert!(text.contains("a();") && text.contains("x();"));
        assert_eq!(
            r.outcomes.iter().map(|o| o.matched).collect::<Vec<_>>(),
            vec![false, false, false]
        );
    }

    #[test]
    fn inherited_bindings_restrict_later_rules() {
        // `use` must reuse the identifier bound by `decl`, so only g's call
        // rewrites in a file that registers g.
        let rules = "@decl@\nidentifier f;\n@@\n register_handler(f);\n\n@use@\nidentifier decl.f;\n@@\n- f()\n+ f(0)\n";
        let r = run(
            rules,
            "void m(void)\n{\n    register_handler(g);\n    g();\n    h();\n}\n",
        );
        let text = String::from_utf8_lossy(&r.output);
        assert!(text.contains("g(0);"), "{text}");
        assert!(text.contains("h();"), "{text}");
    }

    #[test]
    fn script_chain_renames_via_table() {
        let rules = concat!(
            "@initialize:python@\n@@\n\nMAP = { \"alpha\": \"beta\" }\n\n",
            "@find@\nidentifier fn;\nexpression list el;\nposition p;\n@@\n fn@p(el)\n\n",
            "@script:python ren@\nfn << find.fn;\nnf;\n@@\ncoccinelle.nf = cocci.make_ident(MAP[fn]);\n\n",
            "@apply@\nidentifier find.fn;\nidentifier ren.nf;\nposition find.p;\n@@\n- fn@p\n+ nf\n  (...)\n",
        );
        let r = run(rules, "void m(void)\n{\n    alpha(1, 2);\n    gamma(3);\n}\n");
        let text = String::from_utf8_lossy(&r.output);
        assert!(text.contains("beta(1, 2);"), "{text}");
        assert!(text.contains("gamma(3);"), "{text}");
        assert!(matches!(
            &r.warnings[..],
            [Warning::ScriptTableMiss { key, .. }] if key == "gamma"
        ));
    }

    #[test]
    fn identical_rewrites_from_two_environments_collapse() {
        // `decl` binds twice (two declarations); `mark` then matches the same
        // single call site under both environments.
        let rules = "@decl@\ntype T;\nidentifier v;\n@@\n T v;\n\n@mark@\ntype decl.T;\n@@\n- probe();\n+ T check = probe();\n";
        let r = run(
            rules,
            "void m(void)\n{\n    int a;\n    int b;\n    probe();\n}\n",
        );
        let text = String::from_utf8_lossy(&r.output);
        assert_eq!(text.matches("int check = probe();").count(), 1, "{text}");
        let mark = r.outcomes.iter().find(|o| o.name == "mark").unwrap();
        assert_eq!(mark.match_count, 1);
    }

    #[test]
    fn fresh_identifiers_stay_unique_per_match() {
        let rules = "@r@\nidentifier f;\nfresh identifier g = f ## \"_fast\";\n@@\n- void f(...) { slow(); }\n+ void g(void) { quick(); }\n";
        let r = run(
            rules,
            "void a(void) { slow(); }\nvoid b(void) { slow(); }\nvoid a_fast(void) { quick(); }\n",
        );
        let text = String::from_utf8_lossy(&r.output);
        assert!(text.contains("void a_fast_1(void)"), "{text}");
        assert!(text.contains("void b_fast(void)"), "{text}");
    }
}
