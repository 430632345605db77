//! The l1-geometry mirror map and Bregman machinery.
//!
//! `Φ(x) = (e ln p) Σᵢ |xᵢ|^{1+1/ln p}` for dimension `p ≥ 3`. On any set
//! inside the unit 1-ball centered at the origin, `Φ` ranges over at most
//! `e ln p` and is at least 1-strongly convex w.r.t. `‖·‖₁`, which is what
//! the mirror-descent step-size rule assumes. Feasible sets are shifted and
//! scaled into that normal form before use.

use crate::error::{Error, Result};
use crate::optimize::feasible::FeasibleSet;

/// Bisection tolerance on the 1-ball constraint in Bregman projections.
pub const BREGMAN_BISECTION_TOLERANCE: f64 = 1e-10;
const BREGMAN_BISECTION_MAX_STEPS: usize = 200;

#[derive(Debug, Clone)]
pub struct MirrorSetup {
    dimension: usize,
    /// Exponent `q = 1 + 1/ln p`.
    exponent: f64,
    /// Scale `c = e ln p`.
    scale: f64,
}

impl MirrorSetup {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::Config(format!(
                "the l1 mirror map requires p ≥ 3, got {dimension}"
            )));
        }
        let ln_p = (dimension as f64).ln();
        Ok(MirrorSetup {
            dimension,
            exponent: 1.0 + 1.0 / ln_p,
            scale: std::f64::consts::E * ln_p,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `Φ` range bound on the unit 1-ball: `R² = e ln p`.
    pub fn range_sq(&self) -> f64 {
        self.scale
    }

    pub fn phi(&self, x: &[f64]) -> f64 {
        self.scale * x.iter().map(|xi| xi.abs().powf(self.exponent)).sum::<f64>()
    }

    /// `∇Φ(x)ᵢ = c q |xᵢ|^{q−1} sign(xᵢ)`; odd and strictly monotone per
    /// coordinate.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let cq = self.scale * self.exponent;
        x.iter()
            .map(|xi| cq * xi.abs().powf(self.exponent - 1.0) * xi.signum())
            .collect()
    }

    /// Inverse of the gradient map: `∇Φ⁻¹(g)ᵢ = sign(gᵢ)(|gᵢ|/(cq))^{ln p}`.
    pub fn grad_inv(&self, g: &[f64]) -> Vec<f64> {
        let cq = self.scale * self.exponent;
        let inv_exp = 1.0 / (self.exponent - 1.0);
        g.iter()
            .map(|gi| {
                if *gi == 0.0 {
                    0.0
                } else {
                    gi.signum() * (gi.abs() / cq).powf(inv_exp)
                }
            })
            .collect()
    }

    /// Bregman divergence `D_Φ(x, y) = Φ(x) − Φ(y) − ⟨∇Φ(y), x−y⟩`.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> f64 {
        let gy = self.grad(y);
        self.phi(x)
            - self.phi(y)
            - gy.iter()
                .zip(x.iter().zip(y.iter()))
                .map(|(g, (xi, yi))| g * (xi - yi))
                .sum::<f64>()
    }

    /// `argmin_{x∈X} D_Φ(x, y)`.
    ///
    /// Supported sets: any box (the separable divergence clamps coordinate
    /// by coordinate) and origin-centered 1-balls (dual bisection on the
    /// constraint multiplier). Euclidean balls have no closed form under
    /// this map and are rejected.
    pub fn bregman_project(&self, set: &FeasibleSet, y: &[f64]) -> Result<Vec<f64>> {
        match set {
            FeasibleSet::InfBox { center, radius } => Ok(y
                .iter()
                .zip(center)
                .map(|(yi, ci)| yi.clamp(ci - radius, ci + radius))
                .collect()),
            FeasibleSet::OneBall { center, radius } => {
                if center.iter().any(|&ci| ci != 0.0) {
                    return Err(Error::Config(
                        "Bregman projection onto a 1-ball requires an origin-centered ball"
                            .into(),
                    ));
                }
                let l1: f64 = y.iter().map(|v| v.abs()).sum();
                if l1 <= *radius {
                    return Ok(y.to_vec());
                }
                // KKT: cq|x_i|^{q-1} = max(cq|y_i|^{q-1} − μ, 0) with
                // sign(x_i) = sign(y_i). The l1 norm of x(μ) decreases
                // monotonically in μ; bisect to the constraint.
                let cq = self.scale * self.exponent;
                let inv_exp = 1.0 / (self.exponent - 1.0);
                let duals: Vec<f64> = y
                    .iter()
                    .map(|yi| cq * yi.abs().powf(self.exponent - 1.0))
                    .collect();
                let x_of = |mu: f64| -> Vec<f64> {
                    y.iter()
                        .zip(duals.iter())
                        .map(|(yi, d)| {
                            let reduced = (d - mu).max(0.0);
                            yi.signum() * (reduced / cq).powf(inv_exp)
                        })
                        .collect()
                };
                let norm_of = |x: &[f64]| -> f64 { x.iter().map(|v| v.abs()).sum() };
                let mut lo = 0.0;
                let mut hi = duals.iter().fold(0.0f64, |a, &d| a.max(d));
                for _ in 0..BREGMAN_BISECTION_MAX_STEPS {
                    let mid = 0.5 * (lo + hi);
                    let x = x_of(mid);
                    let n = norm_of(&x);
                    if (n - radius).abs() <= BREGMAN_BISECTION_TOLERANCE {
                        return Ok(x);
                    }
                    if n > *radius {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = x_of(0.5 * (lo + hi));
                if (norm_of(&x) - radius).abs() <= 1e-6 {
                    Ok(x)
                } else {
                    Err(Error::Numeric(
                        "Bregman 1-ball bisection did not converge".into(),
                    ))
                }
            }
            FeasibleSet::EuclideanBall { .. } => Err(Error::Config(
                "Bregman projection onto Euclidean balls is not supported by the l1 setup"
                    .into(),
            )),
        }
    }

    /// `argmin_{x∈X} Φ(x)` — the mirror-descent start point.
    pub fn argmin_phi(&self, set: &FeasibleSet) -> Result<Vec<f64>> {
        match set {
            FeasibleSet::InfBox { center, radius } => Ok(center
                .iter()
                .map(|ci| 0.0f64.clamp(ci - radius, ci + radius))
                .collect()),
            FeasibleSet::OneBall { center, radius } => {
                let l1: f64 = center.iter().map(|v| v.abs()).sum();
                if l1 <= *radius {
                    return Ok(vec![0.0; center.len()]);
                }
                // Uniform clip toward zero: x_i = sign(c_i) min(|c_i|, t)
                // with Σ max(|c_i|−t, 0) = radius.
                let mut lo = 0.0;
                let mut hi = center.iter().fold(0.0f64, |a, c| a.max(c.abs()));
                for _ in 0..BREGMAN_BISECTION_MAX_STEPS {
                    let t = 0.5 * (lo + hi);
                    let moved: f64 = center.iter().map(|c| (c.abs() - t).max(0.0)).sum();
                    if (moved - radius).abs() <= BREGMAN_BISECTION_TOLERANCE {
                        break;
                    }
                    if moved > *radius {
                        lo = t;
                    } else {
                        hi = t;
                    }
                }
                let t = 0.5 * (lo + hi);
                Ok(center
                    .iter()
                    .map(|c| c.signum() * c.abs().min(t))
                    .collect())
            }
            FeasibleSet::EuclideanBall { .. } => Err(Error::Config(
                "Φ-argmin over Euclidean balls is not needed by the l1 setup".into(),
            )),
        }
    }
}
