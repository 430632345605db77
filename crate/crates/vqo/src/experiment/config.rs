//! Batch experiment configuration (JSON).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::Method;

/// Configuration for the convergence / separation / identification runners.
///
/// Keys mirror the optimizer configuration, plus lists over methods, qubit
/// counts, precisions, and seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    /// Qubit counts, key `n`.
    #[serde(rename = "n")]
    pub qubit_counts: Vec<usize>,
    /// Precisions, key `eps`.
    #[serde(rename = "eps")]
    pub epsilons: Vec<f64>,
    /// Explicit seed list; when absent, `seed_count` seeds are derived from
    /// `base_seed`.
    pub seeds: Option<Vec<u64>>,
    pub seed_count: usize,
    pub base_seed: u64,
    pub threads: Option<usize>,
    /// Emit `<prefix>.svg` beside the CSV.
    pub svg: bool,
    /// Fill the `wallclock_ms` column with measured timings. Off by
    /// default: timing breaks byte-level reproducibility of the CSV.
    pub timing: bool,
    /// Geometric budget grid for the separation search.
    pub budget_floor: u64,
    pub budget_ceiling: u64,
    /// Multiplier on the zeroth-order prescribed budget in convergence runs.
    pub budget_factor: f64,
    /// Fixed query budget override for convergence runs (otherwise each
    /// method uses its prescribed formula).
    pub iterations: Option<u64>,
    /// Packing construction seed for identification runs.
    pub packing_seed: u64,
    /// Optimization target for identification; defaults to β/9.
    pub identify_target: Option<f64>,
    /// Optimizer overrides (as in the optimizer configuration).
    pub zo_delta_scale: Option<f64>,
    pub zo_step_scale: Option<f64>,
    pub epoch0_iterations: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: vec![Method::SgdSc],
            qubit_counts: vec![8],
            epsilons: vec![0.05],
            seeds: None,
            seed_count: 10,
            base_seed: 0,
            threads: None,
            svg: false,
            timing: false,
            budget_floor: 64,
            budget_ceiling: 1 << 27,
            budget_factor: 1.0,
            iterations: None,
            packing_seed: 1,
            identify_target: None,
            zo_delta_scale: None,
            zo_step_scale: None,
            epoch0_iterations: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("methods list is empty".into()));
        }
        if self.qubit_counts.is_empty() || self.qubit_counts.iter().any(|&n| n == 0) {
            return Err(Error::Config("qubit counts must be positive".into()));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|&e| e <= 0.0) {
            return Err(Error::Config("precisions must be positive".into()));
        }
        for (&n, &eps) in self
            .qubit_counts
            .iter()
            .flat_map(|n| self.epsilons.iter().map(move |e| (n, e)))
        {
            if eps > 0.01 * n as f64 {
                return Err(Error::Config(format!(
                    "ε = {eps} violates ε ≤ 0.01 n for n = {n}"
                )));
            }
        }
        if self.seed_list().is_empty() {
            return Err(Error::Config("no seeds configured".into()));
        }
        if self.budget_floor == 0 || self.budget_ceiling < self.budget_floor {
            return Err(Error::Config("invalid budget grid".into()));
        }
        if self.budget_factor <= 0.0 {
            return Err(Error::Config("budget_factor must be positive".into()));
        }
        Ok(())
    }

    /// The seeds this run will execute.
    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(list) => list.clone(),
            None => (0..self.seed_count as u64).collect(),
        }
    }
}
