//! High-level entry points: load a rule file, run it over one source buffer.

use crate::diagnostics::{Error, Warning};
use crate::engine::{run_rules, RuleOutcome};
use crate::smpl::{parse_rules, validate_rules, RuleSet};

/// Result of applying a rule set to one file.
#[derive(Debug)]
pub struct FileRun {
    pub output: Vec<u8>,
    pub warnings: Vec<Warning>,
    pub outcomes: Vec<RuleOutcome>,
}

impl FileRun {
    pub fn changed(&self, input: &[u8]) -> bool {
        self.output != input
    }

    pub fn count_for(&self, rule: &str) -> usize {
        self.outcomes
            .iter()
            .find(|o| o.name == rule)
            .map(|o| o.match_count)
            .unwrap_or(0)
    }
}

/// Parses and validates a rule file; validation problems are fatal here.
pub fn load_rule_file(text: &str) -> Result<RuleSet, Error> {
    let rules = parse_rules(text)?;
    let diagnostics = validate_rules(&rules);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidRuleSet(diagnostics));
    }
    Ok(rules)
}

/// Applies every rule of `rules` to `src` (named `file` in diagnostics).
pub fn process_source(rules: &RuleSet, src: &[u8], file: &str) -> Result<FileRun, Error> {
    let run = run_rules(rules, src, file)?;
    Ok(FileRun {
        output: run.output,
        warnings: run.warnings,
        outcomes: run.outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_rule_files_are_rejected_up_front() {
        let err = load_rule_file("@r@\nidentifier x;\n@@\n- f(y@q)\n").unwrap_err();
        assert!(matches!(err, Error::InvalidRuleSet(_) | Error::Smpl { .. }));
    }

    #[test]
    fn match_counts_are_reported_per_rule() {
        let rules = load_rule_file("@swap@\n@@\n- a()\n+ b()\n").unwrap();
        let run = process_source(
            &rules,
            b"void f(void)\n{\n    a();\n    a();\n}\n",
            "f.c",
        )
        .unwrap();
        assert_eq!(run.count_for("swap"), 2);
        assert!(run.changed(b"void f(void)\n{\n    a();\n    a();\n}\n"));
    }
}
