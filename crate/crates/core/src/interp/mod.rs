//! Deterministic interpreter, equivalence oracle and failure taxonomy.

mod equiv;
mod exec;
pub mod external;
mod value;

pub use equiv::{
    check_equivalence, check_equivalence_with, classify_failure, normalize_output, outputs_match, rebinding_differs,
    EquivError, EquivalenceVerdict, ErrorClass, Evidence, SemanticCategory, Verdict,
};
pub use exec::{execute, execute_resolved, ExecutionResult, Limits, RuntimeReason, Status};
pub use value::{format_general, Value};
