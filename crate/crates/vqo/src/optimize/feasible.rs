//! Feasible-set geometry: membership, radii, Euclidean projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convex feasible set in one of three shapes.
///
/// The derived radii follow the usual containment relations: `r1` is the
/// smallest 1-ball radius containing the set, `r2` the smallest Euclidean
/// ball radius containing it, and `inner_r2` the largest Euclidean ball
/// radius contained in it (all measured about the set's center).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeasibleSet {
    EuclideanBall { center: Vec<f64>, radius: f64 },
    OneBall { center: Vec<f64>, radius: f64 },
    InfBox { center: Vec<f64>, radius: f64 },
}

impl FeasibleSet {
    pub fn euclidean_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::validated(FeasibleSet::EuclideanBall { center, radius })
    }

    pub fn one_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::validated(FeasibleSet::OneBall { center, radius })
    }

    pub fn inf_box(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::validated(FeasibleSet::InfBox { center, radius })
    }

    pub fn validated(set: FeasibleSet) -> Result<Self> {
        if set.radius() <= 0.0 || !set.radius().is_finite() {
            return Err(Error::Config(format!(
                "feasible-set radius must be positive, got {}",
                set.radius()
            )));
        }
        if set.center().is_empty() {
            return Err(Error::Config("feasible-set center must be nonempty".into()));
        }
        Ok(set)
    }

    pub fn dimension(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            FeasibleSet::EuclideanBall { center, .. }
            | FeasibleSet::OneBall { center, .. }
            | FeasibleSet::InfBox { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            FeasibleSet::EuclideanBall { radius, .. }
            | FeasibleSet::OneBall { radius, .. }
            | FeasibleSet::InfBox { radius, .. } => *radius,
        }
    }

    /// Smallest 1-ball radius containing the set.
    pub fn r1(&self) -> f64 {
        let p = self.dimension() as f64;
        match self {
            FeasibleSet::EuclideanBall { radius, .. } => radius * p.sqrt(),
            FeasibleSet::OneBall { radius, .. } => *radius,
            FeasibleSet::InfBox { radius, .. } => radius * p,
        }
    }

    /// Smallest Euclidean-ball radius containing the set.
    pub fn r2(&self) -> f64 {
        let p = self.dimension() as f64;
        match self {
            FeasibleSet::EuclideanBall { radius, .. } => *radius,
            FeasibleSet::OneBall { radius, .. } => *radius,
            FeasibleSet::InfBox { radius, .. } => radius * p.sqrt(),
        }
    }

    /// Largest Euclidean-ball radius contained in the set.
    pub fn inner_r2(&self) -> f64 {
        let p = self.dimension() as f64;
        match self {
            FeasibleSet::EuclideanBall { radius, .. } => *radius,
            FeasibleSet::OneBall { radius, .. } => radius / p.sqrt(),
            FeasibleSet::InfBox { radius, .. } => *radius,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let c = self.center();
        if x.len() != c.len() {
            return false;
        }
        match self {
            FeasibleSet::EuclideanBall { radius, .. } => {
                let d: f64 = x
                    .iter()
                    .zip(c)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum::<f64>()
                    .sqrt();
                d <= radius + tol
            }
            FeasibleSet::OneBall { radius, .. } => {
                let d: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).abs()).sum();
                d <= radius + tol
            }
            FeasibleSet::InfBox { radius, .. } => x
                .iter()
                .zip(c)
                .all(|(xi, ci)| (xi - ci).abs() <= radius + tol),
        }
    }

    /// Same shape shrunk about its center by `factor ∈ (0, 1]`.
    pub fn shrunk(&self, factor: f64) -> FeasibleSet {
        let mut out = self.clone();
        match &mut out {
            FeasibleSet::EuclideanBall { radius, .. }
            | FeasibleSet::OneBall { radius, .. }
            | FeasibleSet::InfBox { radius, .. } => *radius *= factor,
        }
        out
    }

    /// Euclidean projection `argmin_{y∈X} ‖x − y‖₂`, in closed form.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let c = self.center();
        match self {
            FeasibleSet::EuclideanBall { radius, .. } => {
                let d: f64 = x
                    .iter()
                    .zip(c)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum::<f64>()
                    .sqrt();
                if d <= *radius {
                    return x.to_vec();
                }
                let scale = radius / d;
                x.iter()
                    .zip(c)
                    .map(|(xi, ci)| ci + (xi - ci) * scale)
                    .collect()
            }
            FeasibleSet::InfBox { radius, .. } => x
                .iter()
                .zip(c)
                .map(|(xi, ci)| xi.clamp(ci - radius, ci + radius))
                .collect(),
            FeasibleSet::OneBall { radius, .. } => {
                let d: Vec<f64> = x.iter().zip(c).map(|(xi, ci)| xi - ci).collect();
                let l1: f64 = d.iter().map(|v| v.abs()).sum();
                if l1 <= *radius {
                    return x.to_vec();
                }
                // Soft threshold at the simplex-projection level τ.
                let mut mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
                mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                let mut acc = 0.0;
                let mut tau = 0.0;
                for (k, &m) in mags.iter().enumerate() {
                    acc += m;
                    let t = (acc - radius) / (k as f64 + 1.0);
                    if k + 1 == mags.len() || t >= mags[k + 1] {
                        tau = t;
                        break;
                    }
                }
                d.iter()
                    .zip(c)
                    .map(|(di, ci)| ci + di.signum() * (di.abs() - tau).max(0.0))
                    .collect()
            }
        }
    }
}
