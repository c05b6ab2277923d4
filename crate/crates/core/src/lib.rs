//! A small semantic-patch engine for a C subset.
//!
//! The pipeline has four stages, mirrored by the top-level modules:
//!
//! * [`c_frontend`] — a lossless lexer/parser for the supported C subset.
//!   Token text concatenates back to the input byte-for-byte, so unmodified
//!   regions of a rewritten file stay byte-identical.
//! * [`smpl`] — a parser for the supported subset of the SmPL rule language
//!   (`.cocci` files): pattern rules with context/minus/plus lines,
//!   metavariable declarations, dots, disjunction/conjunction groups,
//!   initializer tables and a restricted declarative script-rule form.
//! * [`engine`] — rule scheduling and tree matching. Rules run in file
//!   order; each pattern rule's edits are applied to a working copy before
//!   the next rule runs, and later rules can inherit bindings from earlier
//!   ones.
//! * [`transform`] — byte-level edit scripts, splicing, and unified-diff
//!   emission (plus a diff re-applier used to check diff fidelity).
//!
//! [`catalog`] loads the on-disk fixture corpus (`catalog/<id>/`), and
//! [`runner`] ties everything together for "apply this rule file to this
//! source file" callers such as the CLI.

pub mod c_frontend;
pub mod catalog;
pub mod diagnostics;
pub mod engine;
pub mod runner;
pub mod smpl;
pub mod transform;

pub use diagnostics::{Diagnostic, Error, SourcePosition, Warning};
