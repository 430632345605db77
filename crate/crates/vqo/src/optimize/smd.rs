//! Stochastic mirror descent with the l1 setup, plain and strongly convex.
//!
//! The plain variant shifts and scales the feasible set into the unit
//! 1-ball normal form, runs the mirror iteration
//! `∇Φ(y_{t+1}) = ∇Φ(x̃_t) − η g̃_t` followed by a Bregman projection, and
//! returns the uniform iterate average. The strongly convex variant wraps
//! it in epoch-doubling restarts: epoch `e` runs plain SMD for
//! `T_e = 2^e T₀` iterations inside a 1-ball of radius `R_e = R₀ 2^{−e/2}`
//! centered at the previous epoch's output, which yields the `1/(λ₁T)`
//! rate without needing the (externally analyzed) reference construction.

use crate::error::{Error, Result};
use crate::gradient::GradientSource;
use crate::optimize::feasible::FeasibleSet;
use crate::optimize::mirror::MirrorSetup;
use crate::optimize::RunTrace;

#[derive(Debug, Clone)]
pub struct SmdConfig {
    pub iterations: u64,
    /// `G∞`: bound on `E‖ĝ‖∞²` of the gradient source.
    pub grad_inf_bound: f64,
    pub record_iterates: bool,
}

/// Plain SMD over a box or 1-ball feasible set (`p ≥ 3`).
pub fn smd_l1(
    source: &mut dyn GradientSource,
    set: &FeasibleSet,
    cfg: &SmdConfig,
) -> Result<RunTrace> {
    if cfg.grad_inf_bound <= 0.0 {
        return Err(Error::Config("G∞ must be positive".into()));
    }
    let setup = MirrorSetup::new(set.dimension())?;
    let scale = set.r1();
    let center = set.center().to_vec();
    let rescaled = rescale(set, &center, scale)?;
    let start = setup.argmin_phi(&rescaled)?;
    let eta = setup.range_sq().sqrt() / (scale * cfg.grad_inf_bound)
        * (2.0 / cfg.iterations.max(1) as f64).sqrt();
    smd_loop(
        source,
        &setup,
        &rescaled,
        &center,
        scale,
        start,
        cfg.iterations,
        eta,
        cfg.record_iterates,
        None,
    )
}

#[derive(Debug, Clone)]
pub struct SmdScConfig {
    /// Total iteration budget across all epochs.
    pub iterations: u64,
    /// First-epoch length `T₀`.
    pub epoch0_iterations: u64,
    /// `G∞` bound of the gradient source.
    pub grad_inf_bound: f64,
    /// Initial epoch-ball radius `R₀`; defaults to the set's `r1`.
    pub initial_radius: Option<f64>,
    pub record_iterates: bool,
}

impl Default for SmdScConfig {
    fn default() -> Self {
        SmdScConfig {
            iterations: 0,
            epoch0_iterations: 64,
            grad_inf_bound: 1.0,
            initial_radius: None,
            record_iterates: false,
        }
    }
}

/// Epoch-restarted SMD for functions strongly convex w.r.t. `‖·‖₁`.
///
/// Iterates stay inside the feasible set: the epoch 1-ball projection is
/// composed with the set's own projection, which for boxes cannot re-exit
/// the epoch ball. With a zero budget the start point (the set center) is
/// returned untouched.
pub fn smd_strongly_convex(
    source: &mut dyn GradientSource,
    set: &FeasibleSet,
    cfg: &SmdScConfig,
) -> Result<RunTrace> {
    if cfg.grad_inf_bound <= 0.0 {
        return Err(Error::Config("G∞ must be positive".into()));
    }
    if cfg.epoch0_iterations == 0 {
        return Err(Error::Config("epoch0_iterations must be positive".into()));
    }
    let setup = MirrorSetup::new(set.dimension())?;
    let mut anchor = set.center().to_vec();
    let mut radius = cfg.initial_radius.unwrap_or_else(|| set.r1());
    let mut remaining = cfg.iterations;
    let mut queries = 0u64;
    let mut iterates = Vec::new();
    let mut epoch_len = cfg.epoch0_iterations;
    while remaining > 0 {
        let t_e = epoch_len.min(remaining);
        let epoch_ball = FeasibleSet::one_ball(vec![0.0; set.dimension()], 1.0)?;
        let eta = setup.range_sq().sqrt() / (radius * cfg.grad_inf_bound)
            * (2.0 / t_e as f64).sqrt();
        let trace = smd_loop(
            source,
            &setup,
            &epoch_ball,
            &anchor,
            radius,
            vec![0.0; set.dimension()],
            t_e,
            eta,
            cfg.record_iterates,
            Some(set),
        )?;
        queries += trace.queries;
        if cfg.record_iterates {
            iterates.extend(trace.iterates);
        }
        anchor = set.project(&trace.output);
        remaining -= t_e;
        radius /= std::f64::consts::SQRT_2;
        epoch_len = epoch_len.saturating_mul(2);
    }
    Ok(RunTrace {
        iterates,
        output: anchor,
        queries,
        final_error: None,
        projected_start: false,
    })
}

fn rescale(set: &FeasibleSet, center: &[f64], scale: f64) -> Result<FeasibleSet> {
    match set {
        FeasibleSet::InfBox { radius, .. } => {
            FeasibleSet::inf_box(vec![0.0; center.len()], radius / scale)
        }
        FeasibleSet::OneBall { radius, .. } => {
            FeasibleSet::one_ball(vec![0.0; center.len()], radius / scale)
        }
        FeasibleSet::EuclideanBall { .. } => Err(Error::Config(
            "the l1 mirror setup supports box and 1-ball feasible sets".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn smd_loop(
    source: &mut dyn GradientSource,
    setup: &MirrorSetup,
    rescaled_set: &FeasibleSet,
    center: &[f64],
    scale: f64,
    start: Vec<f64>,
    iterations: u64,
    eta: f64,
    record: bool,
    clamp_into: Option<&FeasibleSet>,
) -> Result<RunTrace> {
    let p = center.len();
    if source.dimension() != p {
        return Err(Error::DimensionMismatch(format!(
            "gradient source dimension vs feasible set dimension {p}"
        )));
    }
    let mut x_tilde = start;
    let mut avg = vec![0.0; p];
    let mut queries = 0u64;
    let mut iterates = Vec::new();
    let to_global = |xt: &[f64]| -> Vec<f64> {
        xt.iter()
            .zip(center)
            .map(|(xi, ci)| ci + scale * xi)
            .collect()
    };
    if iterations == 0 {
        return Ok(RunTrace {
            iterates,
            output: to_global(&x_tilde),
            queries: 0,
            final_error: None,
            projected_start: false,
        });
    }
    for _ in 0..iterations {
        let global = to_global(&x_tilde);
        if record {
            iterates.push(global.clone());
        }
        for (a, xi) in avg.iter_mut().zip(global.iter()) {
            *a += xi / iterations as f64;
        }
        let sample = source.sample(&global)?;
        queries += sample.queries_used;
        // Chain rule: the gradient w.r.t. the rescaled coordinates.
        let mut dual = setup.grad(&x_tilde);
        for (d, g) in dual.iter_mut().zip(sample.vector.iter()) {
            *d -= eta * scale * g;
        }
        let y = setup.grad_inv(&dual);
        let mut projected = setup.bregman_project(rescaled_set, &y)?;
        if let Some(outer) = clamp_into {
            let clamped = outer.project(&to_global(&projected));
            projected = clamped
                .iter()
                .zip(center)
                .map(|(xi, ci)| (xi - ci) / scale)
                .collect();
        }
        x_tilde = projected;
    }
    Ok(RunTrace {
        iterates,
        output: avg,
        queries,
        final_error: None,
        projected_start: false,
    })
}
