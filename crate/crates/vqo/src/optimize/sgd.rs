//! Projected stochastic gradient descent, plain and strongly convex.

use crate::error::{Error, Result};
use crate::gradient::GradientSource;
use crate::optimize::feasible::FeasibleSet;
use crate::optimize::RunTrace;

#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub iterations: u64,
    /// `G₂`: bound on `E‖ĝ‖₂²` of the gradient source.
    pub grad_norm_bound: f64,
    /// `R₂` override; defaults to the feasible set's containing radius.
    pub radius: Option<f64>,
    pub record_iterates: bool,
}

/// Fixed-step projected SGD: `x_{t+1} = Π_X(x_t − η ĝ(x_t))` with
/// `η = (R₂/G₂)√(2/T)`; returns the uniform average of the visited points.
pub fn sgd_fixed(
    source: &mut dyn GradientSource,
    set: &FeasibleSet,
    start: &[f64],
    cfg: &SgdConfig,
) -> Result<RunTrace> {
    if cfg.grad_norm_bound <= 0.0 {
        return Err(Error::Config("G₂ must be positive".into()));
    }
    let t_total = cfg.iterations;
    let radius = cfg.radius.unwrap_or_else(|| set.r2());
    let eta = radius / cfg.grad_norm_bound * (2.0 / t_total.max(1) as f64).sqrt();
    run_sgd(source, set, start, t_total, cfg.record_iterates, |_s| eta, Averaging::Uniform)
}

#[derive(Debug, Clone)]
pub struct SgdScConfig {
    pub iterations: u64,
    /// Strong-convexity modulus w.r.t. the Euclidean norm.
    pub lambda2: f64,
    pub record_iterates: bool,
}

/// Strongly convex SGD: step `η_s = 2/(λ₂(s+1))`, weighted-average output
/// `Σ_s 2s/(T(T+1)) x_s`.
pub fn sgd_strongly_convex(
    source: &mut dyn GradientSource,
    set: &FeasibleSet,
    start: &[f64],
    cfg: &SgdScConfig,
) -> Result<RunTrace> {
    if cfg.lambda2 <= 0.0 {
        return Err(Error::Config("λ₂ must be positive".into()));
    }
    let lambda = cfg.lambda2;
    run_sgd(
        source,
        set,
        start,
        cfg.iterations,
        cfg.record_iterates,
        move |s| 2.0 / (lambda * (s as f64 + 1.0)),
        Averaging::LinearWeights,
    )
}

enum Averaging {
    Uniform,
    /// Weight `2s/(T(T+1))` on iterate `s` (1-based).
    LinearWeights,
}

fn run_sgd(
    source: &mut dyn GradientSource,
    set: &FeasibleSet,
    start: &[f64],
    iterations: u64,
    record: bool,
    step: impl Fn(u64) -> f64,
    averaging: Averaging,
) -> Result<RunTrace> {
    let p = set.dimension();
    if start.len() != p || source.dimension() != p {
        return Err(Error::DimensionMismatch(format!(
            "start/source dimension vs feasible set dimension {p}"
        )));
    }
    let projected_start = !set.contains(start, 1e-12);
    let mut x = set.project(start);
    let mut avg = vec![0.0; p];
    let mut queries = 0u64;
    let mut iterates = Vec::new();
    if iterations == 0 {
        return Ok(RunTrace {
            iterates,
            output: x,
            queries: 0,
            final_error: None,
            projected_start,
        });
    }
    let t_total = iterations as f64;
    for s in 1..=iterations {
        if record {
            iterates.push(x.clone());
        }
        let weight = match averaging {
            Averaging::Uniform => 1.0 / t_total,
            Averaging::LinearWeights => 2.0 * s as f64 / (t_total * (t_total + 1.0)),
        };
        for (a, xi) in avg.iter_mut().zip(x.iter()) {
            *a += weight * xi;
        }
        let sample = source.sample(&x)?;
        queries += sample.queries_used;
        let eta = step(s);
        let moved: Vec<f64> = x
            .iter()
            .zip(sample.vector.iter())
            .map(|(xi, gi)| xi - eta * gi)
            .collect();
        x = set.project(&moved);
    }
    Ok(RunTrace {
        iterates,
        output: avg,
        queries,
        final_error: None,
        projected_start,
    })
}
