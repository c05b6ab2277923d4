//! Shipped-rule catalog discovery.
//!
//! Each catalog entry is a self-contained directory
//! `catalog/<id>/{rule.cocci,input.c,expected.c,meta}`; `meta` is a
//! `key = value` text file. Entries belonging to one family share an id
//! prefix and carry the family name explicitly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::Error;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: String,
    pub family: String,
    pub dir: PathBuf,
    pub rule_file: PathBuf,
    pub input: PathBuf,
    pub golden: PathBuf,
    /// `c` or `c-ext` (chevrons, range-for, attributes, ...).
    pub dialect: String,
    /// Expected match count per rule name.
    pub expected_matches: Vec<(String, usize)>,
    /// Whether a second engine run over the output must be a no-op.
    pub idempotent: bool,
    /// Golden for the second run; only present when not idempotent.
    pub twice: Option<PathBuf>,
    /// Entry encodes an interpretation rather than a published rule.
    pub experimental: bool,
}

/// Loads every fixture under `root`, sorted by id.
pub fn load_catalog(root: &Path) -> Result<Vec<Fixture>, Error> {
    let mut fixtures = Vec::new();
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    for dir in dirs {
        let meta_path = dir.join("meta");
        if !meta_path.is_file() {
            continue;
        }
        fixtures.push(parse_meta(&dir, &fs::read_to_string(&meta_path)?)?);
    }
    Ok(fixtures)
}

fn parse_meta(dir: &Path, text: &str) -> Result<Fixture, Error> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut fx = Fixture {
        id,
        family: String::new(),
        dir: dir.to_path_buf(),
        rule_file: dir.join("rule.cocci"),
        input: dir.join("input.c"),
        golden: dir.join("expected.c"),
        dialect: "c".to_string(),
        expected_matches: Vec::new(),
        idempotent: true,
        twice: None,
        experimental: false,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Other(format!(
                "{}: meta line {} is not `key = value`",
                dir.display(),
                lineno + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "family" => fx.family = value.to_string(),
            "dialect" => fx.dialect = value.to_string(),
            "idempotent" => fx.idempotent = parse_bool(dir, key, value)?,
            "experimental" => fx.experimental = parse_bool(dir, key, value)?,
            "twice" => fx.twice = Some(dir.join(value)),
            _ => {
                if let Some(rule) = key.strip_prefix("match.") {
                    let n = value.parse().map_err(|_| {
                        Error::Other(format!(
                            "{}: bad match count `{value}` for rule `{rule}`",
                            dir.display()
                        ))
                    })?;
                    fx.expected_matches.push((rule.to_string(), n));
                } else {
                    return Err(Error::Other(format!(
                        "{}: unknown meta key `{key}`",
                        dir.display()
                    )));
                }
            }
        }
    }
    if fx.family.is_empty() {
        return Err(Error::Other(format!(
            "{}: meta is missing `family`",
            dir.display()
        )));
    }
    if fx.idempotent && fx.twice.is_some() {
        return Err(Error::Other(format!(
            "{}: idempotent entries must not carry a `twice` golden",
            dir.display()
        )));
    }
    Ok(fx)
}

fn parse_bool(dir: &Path, key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "yes" => Ok(true),
        "no" => Ok(false),
        _ => Err(Error::Other(format!(
            "{}: `{key}` must be yes or no, got `{value}`",
            dir.display()
        ))),
    }
}

/// The repository's own catalog directory (for in-tree tests and tools).
pub fn default_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join("catalog")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_parsing_reads_all_fields() {
        let dir = std::env::temp_dir().join("minispatch-meta-test");
        fs::create_dir_all(&dir).unwrap();
        let fx = parse_meta(
            &dir,
            "family = fx_demo\ndialect = c-ext\nidempotent = no\ntwice = expected_twice.c\nmatch.a = 2\nmatch.b = 0\n",
        )
        .unwrap();
        assert_eq!(fx.family, "fx_demo");
        assert_eq!(fx.dialect, "c-ext");
        assert!(!fx.idempotent);
        assert_eq!(fx.twice.as_deref(), Some(dir.join("expected_twice.c").as_path()));
        assert_eq!(
            fx.expected_matches,
            vec![("a".to_string(), 2), ("b".to_string(), 0)]
        );
    }

    #[test]
    fn second_golden_on_idempotent_entry_is_rejected() {
        let dir = std::env::temp_dir().join("minispatch-meta-test");
        fs::create_dir_all(&dir).unwrap();
        assert!(parse_meta(&dir, "family = x\nidempotent = yes\ntwice = t.c\n").is_err());
        assert!(parse_meta(&dir, "family = x\nidempotent = no\n").is_ok());
    }
}
