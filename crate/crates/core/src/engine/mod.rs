//! Rule matching, script evaluation, and sequential rule scheduling.

pub mod binding;
pub mod matcher;
pub mod scheduler;
pub mod script;

pub use binding::{Bindings, BoundValue, Env};
pub use matcher::{match_rule, ChunkPlan, MatchResult, MinusRun};
pub use scheduler::{run_rules, RuleOutcome, RunResult};
pub use script::{eval_script, gen_fresh, merge_tables, Tables};
