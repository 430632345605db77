//! One-point spherical zeroth-order optimization.
//!
//! Each iteration draws `u` uniformly on the unit sphere, takes a single
//! objective sample at `x_t + δ_s u`, forms the one-point gradient surrogate
//! `ĝ = (p/δ_s) F̂ u`, and takes a projected gradient step. Iterates live in
//! the shrunken set `(1−ξ)X` with `ξ = δ_s/r₂`, so every query point stays
//! inside `X`. The smoothing radius and step size follow the one-point
//! schedule `δ_s ∝ T^{−1/4}`, `η ∝ T^{−3/4}`; the proportionality constants
//! are configuration fields.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gradient::ValueSource;
use crate::optimize::feasible::FeasibleSet;
use crate::optimize::RunTrace;

#[derive(Debug, Clone)]
pub struct ZoConfig {
    pub iterations: u64,
    /// `δ_s = delta_scale · T^{−1/4}`, capped below `r₂`.
    pub delta_scale: f64,
    /// `η = step_scale · T^{−3/4}`.
    pub step_scale: f64,
    pub record_iterates: bool,
}

/// Derive the smoothing radius for a budget, keeping it inside the set.
pub fn smoothing_radius(cfg: &ZoConfig, set: &FeasibleSet) -> f64 {
    let t = cfg.iterations.max(1) as f64;
    (cfg.delta_scale * t.powf(-0.25)).min(0.99 * set.inner_r2())
}

/// One-point spherical method; returns the uniform average of the iterates.
pub fn zo_spherical(
    source: &mut dyn ValueSource,
    set: &FeasibleSet,
    cfg: &ZoConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace> {
    if set.inner_r2() <= 0.0 {
        return Err(Error::Config("feasible set must contain a ball (r₂ > 0)".into()));
    }
    if cfg.delta_scale <= 0.0 || cfg.step_scale <= 0.0 {
        return Err(Error::Config("zo scales must be positive".into()));
    }
    let p = set.dimension();
    let t_total = cfg.iterations;
    let delta = smoothing_radius(cfg, set);
    let xi = delta / set.inner_r2();
    let work_set = set.shrunk(1.0 - xi);
    let eta = cfg.step_scale * (t_total.max(1) as f64).powf(-0.75);

    let mut x = work_set.center().to_vec();
    let mut avg = vec![0.0; p];
    let mut queries = 0u64;
    let mut iterates = Vec::new();
    if t_total == 0 {
        return Ok(RunTrace {
            iterates,
            output: x,
            queries: 0,
            final_error: None,
            projected_start: false,
        });
    }
    let mut u = vec![0.0; p];
    for _ in 0..t_total {
        if cfg.record_iterates {
            iterates.push(x.clone());
        }
        for (a, xi_) in avg.iter_mut().zip(x.iter()) {
            *a += xi_ / t_total as f64;
        }
        // Uniform direction on the sphere.
        loop {
            let mut norm_sq = 0.0;
            for ui in u.iter_mut() {
                *ui = rng.sample::<f64, _>(rand_distr::StandardNormal);
                norm_sq += *ui * *ui;
            }
            if norm_sq > 1e-24 {
                let inv = norm_sq.sqrt().recip();
                for ui in u.iter_mut() {
                    *ui *= inv;
                }
                break;
            }
        }
        let probe: Vec<f64> = x.iter().zip(u.iter()).map(|(xi_, ui)| xi_ + delta * ui).collect();
        debug_assert!(set.contains(&probe, 1e-9));
        let (value, used) = source.sample(&probe)?;
        queries += used;
        let coeff = eta * (p as f64 / delta) * value;
        let moved: Vec<f64> = x
            .iter()
            .zip(u.iter())
            .map(|(xi_, ui)| xi_ - coeff * ui)
            .collect();
        x = work_set.project(&moved);
    }
    Ok(RunTrace {
        iterates,
        output: avg,
        queries,
        final_error: None,
        projected_start: false,
    })
}
