//! Stochastic optimizers over convex feasible sets.
//!
//! All methods consume the gradient/value sources from [`crate::gradient`]
//! and report a [`RunTrace`]. Step sizes follow the standard prescriptions:
//! fixed `(R₂/G₂)√(2/T)` for plain SGD, `2/(λ₂(s+1))` for strongly convex
//! SGD, `√(e ln p)/G̃∞ · √(2/T)` in rescaled coordinates for mirror
//! descent, and the one-point schedule for the spherical zeroth-order
//! method.

mod feasible;
mod mirror;
mod sgd;
mod smd;
mod zeroth;

pub use feasible::FeasibleSet;
pub use mirror::{MirrorSetup, BREGMAN_BISECTION_TOLERANCE};
pub use sgd::{sgd_fixed, sgd_strongly_convex, SgdConfig, SgdScConfig};
pub use smd::{smd_l1, smd_strongly_convex, SmdConfig, SmdScConfig};
pub use zeroth::{smoothing_radius, zo_spherical, ZoConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euclidean projection onto a feasible set (closed form per shape).
pub fn project(set: &FeasibleSet, x: &[f64]) -> Vec<f64> {
    set.project(x)
}

/// Bregman projection under the l1 mirror map.
pub fn bregman_project(setup: &MirrorSetup, set: &FeasibleSet, y: &[f64]) -> Result<Vec<f64>> {
    setup.bregman_project(set, y)
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    /// Visited iterates, recorded only when requested (long runs skip this).
    pub iterates: Vec<Vec<f64>>,
    /// The averaged / final output point.
    pub output: Vec<f64>,
    /// Oracle queries consumed, as counted by the sources.
    pub queries: u64,
    /// Suboptimality of `output`, filled in by callers that know the exact
    /// objective.
    pub final_error: Option<f64>,
    /// Whether the provided start point had to be projected into the set.
    pub projected_start: bool,
}

/// Optimizer selector used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sgd,
    SgdSc,
    Smd,
    SmdSc,
    Zo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::SgdSc => "sgd-sc",
            Method::Smd => "smd",
            Method::SmdSc => "smd-sc",
            Method::Zo => "zo",
        }
    }

    pub fn is_strongly_convex(&self) -> bool {
        matches!(self, Method::SgdSc | Method::SmdSc)
    }

    pub fn is_zeroth_order(&self) -> bool {
        matches!(self, Method::Zo)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Method::Sgd),
            "sgd-sc" => Ok(Method::SgdSc),
            "smd" => Ok(Method::Smd),
            "smd-sc" => Ok(Method::SmdSc),
            "zo" => Ok(Method::Zo),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Declarative optimizer configuration (mirrors the CLI config keys).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Iteration budget `T`.
    pub iterations: u64,
    /// Geometry overrides; default to the feasible set's derived radii.
    pub radius_r2: Option<f64>,
    pub radius_r1: Option<f64>,
    pub inner_r2: Option<f64>,
    /// Strong-convexity moduli; exactly one must be present for the
    /// corresponding `-sc` method and absent otherwise.
    pub lambda2: Option<f64>,
    pub lambda1: Option<f64>,
    /// Norm bounds of the stochastic sources.
    pub grad_norm_bound: Option<f64>,
    pub grad_inf_bound: Option<f64>,
    pub value_bound: Option<f64>,
    pub seed: u64,
    pub zo_delta_scale: Option<f64>,
    pub zo_step_scale: Option<f64>,
    pub epoch0_iterations: Option<u64>,
    pub record_iterates: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::SgdSc,
            iterations: 1000,
            radius_r2: None,
            radius_r1: None,
            inner_r2: None,
            lambda2: None,
            lambda1: None,
            grad_norm_bound: None,
            grad_inf_bound: None,
            value_bound: None,
            seed: 0,
            zo_delta_scale: None,
            zo_step_scale: None,
            epoch0_iterations: None,
            record_iterates: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iteration budget must be positive".into()));
        }
        for (name, v) in [
            ("radius_r2", self.radius_r2),
            ("radius_r1", self.radius_r1),
            ("inner_r2", self.inner_r2),
            ("grad_norm_bound", self.grad_norm_bound),
            ("grad_inf_bound", self.grad_inf_bound),
            ("value_bound", self.value_bound),
            ("zo_delta_scale", self.zo_delta_scale),
            ("zo_step_scale", self.zo_step_scale),
        ] {
            if let Some(v) = v {
                if v <= 0.0 || !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        match self.method {
            Method::SgdSc => {
                if self.lambda2.map_or(true, |l| l <= 0.0) {
                    return Err(Error::Config("sgd-sc requires λ₂ > 0".into()));
                }
            }
            Method::SmdSc => {
                if self.lambda1.map_or(true, |l| l <= 0.0) {
                    return Err(Error::Config("smd-sc requires λ₁ > 0".into()));
                }
            }
            _ => {
                if self.lambda1.is_some() || self.lambda2.is_some() {
                    return Err(Error::Config(
                        "strong-convexity moduli are only valid for -sc methods".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
