//! Propositional circumscription: entailment in minimal models and the set
//! of variables free for negation, decided by abstraction refinement over an
//! incremental SAT solver.

pub mod closure;
pub mod engine;
pub mod entails;
pub mod ffn;
pub mod formula;
pub mod oracle;
pub mod sat;

pub use closure::{free_for_negation_all, gcwa_closure, ClosureResult, GcwaClosure, ScheduleConfig, VarStatus};
pub use engine::{Encoding, EngineError, PolarityPolicy, RunStats};
pub use entails::{entails_min, EntailsConfig, EntailsReport, FlipDescriptor, Verdict};
pub use ffn::{free_for_negation, FfnConfig, FfnOutcome};
pub use formula::{Assignment, BoolExpr, CnfFormula, Lit, Partition, Var, VarSet};
