//! The check harness: registry, fixed test family, and report plumbing.

pub mod checks;
pub mod family;
pub mod report;

pub use checks::{estimate_norm_ratio, known_ids, refinement_study, run_check, REGISTRY};
pub use family::{NamedFunction, TestFamily};
pub use report::{
    trend_factors, CheckOutcome, CheckReport, ResolutionEntry, TOOLKIT_VERSION, VERDICT_FAIL,
    VERDICT_GATED, VERDICT_PASS,
};
