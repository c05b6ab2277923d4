//! Source rewriting: turning match results into byte edits and diffs.

pub mod diff;
pub mod edit;

pub use diff::{apply_unified_diff, unified_diff};
pub use edit::{apply_edits, edits_for_match, Edit};
