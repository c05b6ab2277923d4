//! Metavariable binding environments.
//!
//! Equality between bound values is structural: the sequence of significant
//! token texts, so `i + 1` and `i+1` bind equal. Positions compare by byte
//! offset within the working source of the rule that bound them.

use crate::c_frontend::{lex, NodeId, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundValue {
    /// Source text plus its significant-token signature.
    Text { text: String, sig: Vec<String> },
    /// A matched site position (byte offset; line/col derived on demand).
    Position { offset: usize },
}

impl BoundValue {
    pub fn from_node(tree: &SyntaxTree, id: NodeId) -> Self {
        let text = String::from_utf8_lossy(tree.slice(id)).into_owned();
        let sig = tree
            .sig(id)
            .into_iter()
            .map(|b| String::from_utf8_lossy(b).into_owned())
            .collect();
        BoundValue::Text { text, sig }
    }

    /// Binds a raw source slice (statement-list, parameter-list, argument
    /// slices); the signature is re-lexed from the text.
    pub fn from_text(text: &str) -> Self {
        let sig = lex(text.as_bytes())
            .iter()
            .filter(|t| !t.kind.is_trivia())
            .map(|t| String::from_utf8_lossy(t.text(text.as_bytes())).into_owned())
            .collect();
        BoundValue::Text { text: text.to_string(), sig }
    }

    pub fn position(offset: usize) -> Self {
        BoundValue::Position { offset }
    }

    /// Text to splice into plus lines. Positions have no splice text.
    pub fn text(&self) -> Option<&str> {
        match self {
            BoundValue::Text { text, .. } => Some(text),
            BoundValue::Position { .. } => None,
        }
    }

    /// Structural equality (whitespace-insensitive for text values).
    pub fn same(&self, other: &BoundValue) -> bool {
        match (self, other) {
            (BoundValue::Text { sig: a, .. }, BoundValue::Text { sig: b, .. }) => a == b,
            (BoundValue::Position { offset: a }, BoundValue::Position { offset: b }) => a == b,
            _ => false,
        }
    }
}

/// Bindings qualified by rule name, carried across rules.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub entries: Vec<((String, String), BoundValue)>,
}

impl Env {
    pub fn get(&self, rule: &str, name: &str) -> Option<&BoundValue> {
        self.entries
            .iter()
            .find(|((r, n), _)| r == rule && n == name)
            .map(|(_, v)| v)
    }

    pub fn set(&mut self, rule: &str, name: &str, value: BoundValue) {
        if let Some(slot) = self
            .entries
            .iter_mut()
            .find(|((r, n), _)| r == rule && n == name)
        {
            slot.1 = value;
        } else {
            self.entries.push(((rule.to_string(), name.to_string()), value));
        }
    }
}

/// Rule-local bindings used while matching one site, with rollback.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    entries: Vec<(String, BoundValue)>,
}

impl Bindings {
    pub fn seeded(seed: &[(String, BoundValue)]) -> Self {
        Bindings { entries: seed.to_vec() }
    }

    pub fn get(&self, name: &str) -> Option<&BoundValue> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Binds or checks consistency; false when `name` is already bound to a
    /// structurally different value.
    pub fn bind(&mut self, name: &str, value: BoundValue) -> bool {
        match self.get(name) {
            Some(existing) => existing.same(&value),
            None => {
                self.entries.push((name.to_string(), value));
                true
            }
        }
    }

    pub fn mark(&self) -> usize {
        self.entries.len()
    }

    pub fn rollback(&mut self, mark: usize) {
        self.entries.truncate(mark);
    }

    pub fn into_entries(self) -> Vec<(String, BoundValue)> {
        self.entries
    }

    pub fn entries(&self) -> &[(String, BoundValue)] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_equality_ignores_whitespace() {
        let a = BoundValue::from_text("i + 1");
        let b = BoundValue::from_text("i+1");
        let c = BoundValue::from_text("i+2");
        assert!(a.same(&b));
        assert!(!a.same(&c));
    }

    #[test]
    fn rebinding_requires_equality() {
        let mut b = Bindings::default();
        assert!(b.bind("A", BoundValue::from_text("x = 1;")));
        assert!(b.bind("A", BoundValue::from_text("x  =  1 ;")));
        assert!(!b.bind("A", BoundValue::from_text("x = 2;")));
    }

    #[test]
    fn rollback_discards_trial_bindings() {
        let mut b = Bindings::default();
        b.bind("A", BoundValue::from_text("x"));
        let m = b.mark();
        b.bind("B", BoundValue::from_text("y"));
        b.rollback(m);
        assert!(b.get("B").is_none());
        assert!(b.get("A").is_some());
    }

    #[test]
    fn positions_compare_by_offset() {
        assert!(BoundValue::position(10).same(&BoundValue::position(10)));
        assert!(!BoundValue::position(10).same(&BoundValue::position(11)));
        assert!(!BoundValue::position(10).same(&BoundValue::from_text("10")));
    }
}
