//! Experiment records and the stable CSV schema.

use crate::optimize::Method;

pub const CSV_HEADER: &str =
    "method,n,eps,seed,q0,q1,qk,queries_total,final_error,wallclock_ms,censored";

/// One optimizer run's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub method: Method,
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    /// Oracle queries by order: zeroth, first, second-and-above.
    pub q0: u64,
    pub q1: u64,
    pub qk: u64,
    pub queries_total: u64,
    pub final_error: f64,
    /// Zero unless timing output was requested (timing breaks
    /// byte-reproducibility of the CSV).
    pub wallclock_ms: u64,
    /// Set when a budget search hit its ceiling without reaching the target.
    pub censored: bool,
}

/// Deterministic sort order used before writing: method, n, eps, seed.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| {
        a.method
            .as_str()
            .cmp(b.method.as_str())
            .then(a.n.cmp(&b.n))
            .then(a.eps.total_cmp(&b.eps))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Render records in the stable CSV schema.
pub fn to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.n,
            r.eps,
            r.seed,
            r.q0,
            r.q1,
            r.qk,
            r.queries_total,
            r.final_error,
            r.wallclock_ms,
            if r.censored { 1 } else { 0 },
        ));
    }
    out
}
