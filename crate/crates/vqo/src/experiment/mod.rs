//! Batch experiment harness: runners, records, fits, and plots.

mod config;
mod fit;
mod records;
mod runners;
pub mod svg;

pub use config::ExperimentConfig;
pub use fit::fit_powerlaw;
pub use records::{sort_records, to_csv, ExperimentRecord, CSV_HEADER};
pub use runners::{
    prescribed_query_budget, queries_per_iteration, run_convergence, run_identification,
    run_separation, run_toy_method, toy_problem, zo_default_scales, IdentificationReport,
    RunOutput, RunSpec, SearchSummary,
};
