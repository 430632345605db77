//! Unbiased full-gradient estimators built from first-order oracle queries.
//!
//! Two constructions with different norm profiles:
//!
//! - [`estimate_grad_l1`]: one query. Selects coordinate `j` with
//!   probability `Γ_j/‖Γ⃗‖₁`, queries it, and scales by `(‖Γ⃗‖₁/Γ_j) ê_j`.
//!   The output is one-hot with magnitude exactly `‖Γ⃗‖₁`, which is the
//!   right shape for SGD in a Euclidean geometry.
//! - [`estimate_grad_l2`]: a mini-batch of
//!   `N_j = ⌈p (Γ_j²/‖Γ⃗‖₂²) ln(4p² ‖Γ⃗‖∞²/‖Γ⃗‖₂²)⌉` queries per
//!   coordinate, averaged component-wise. When the true gradient satisfies
//!   `‖∇f‖∞ ≤ ‖Γ⃗‖₂/√(2p)`, the estimate obeys
//!   `E‖ĝ‖∞² ≤ 5‖Γ⃗‖₂²/(2p)`, the right shape for mirror descent in an
//!   l1 geometry. That precondition is not checked at runtime — the
//!   optimizer cannot know `∇f` — and is asserted only in tests where the
//!   exact gradient is available.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::Ansatz;
use crate::error::Result;
use crate::oracle::{GammaTable, SamplingOracle};

/// One stochastic estimate of `∇f(θ)` and the number of oracle queries it
/// consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub vector: Vec<f64>,
    pub queries_used: u64,
}

/// One-query estimator: one-hot vector of magnitude `‖Γ⃗‖₁`.
///
/// With an all-zero table the true gradient vanishes identically, so the
/// estimator returns the zero vector without consuming a query.
pub fn estimate_grad_l1(
    oracle: &mut SamplingOracle,
    ansatz: &Ansatz,
    table: &GammaTable,
    theta: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<GradientSample> {
    let p = table.parameter_count();
    let l1 = table.l1_norm();
    if l1 == 0.0 {
        return Ok(GradientSample {
            vector: vec![0.0; p],
            queries_used: 0,
        });
    }
    let mut target = rng.gen::<f64>() * l1;
    let mut j = p - 1;
    for (idx, row) in table.rows().iter().enumerate() {
        if target < row.gamma_total {
            j = idx;
            break;
        }
        target -= row.gamma_total;
    }
    let out = oracle.query(ansatz, theta, &[j])?;
    let mut vector = vec![0.0; p];
    vector[j] = out * l1 / table.gamma(j);
    Ok(GradientSample {
        vector,
        queries_used: 1,
    })
}

/// Per-coordinate query counts `N_j` of the mini-batch estimator.
pub fn l2_query_schedule(table: &GammaTable) -> Vec<u64> {
    let p = table.parameter_count() as f64;
    let l2_sq = table.l2_norm().powi(2);
    if l2_sq == 0.0 {
        return vec![0; table.parameter_count()];
    }
    let log_arg = 4.0 * p * p * table.inf_norm().powi(2) / l2_sq;
    table
        .gamma_vec()
        .iter()
        .map(|g| {
            if *g == 0.0 {
                0
            } else {
                (p * g * g / l2_sq * log_arg.ln()).ceil() as u64
            }
        })
        .collect()
}

/// Total queries consumed by one [`estimate_grad_l2`] call.
pub fn l2_query_budget(table: &GammaTable) -> u64 {
    l2_query_schedule(table).iter().sum()
}

/// Mini-batch estimator: per-coordinate averages of `N_j` queries.
pub fn estimate_grad_l2(
    oracle: &mut SamplingOracle,
    ansatz: &Ansatz,
    table: &GammaTable,
    theta: &[f64],
) -> Result<GradientSample> {
    let p = table.parameter_count();
    let schedule = l2_query_schedule(table);
    let mut vector = vec![0.0; p];
    let mut queries = 0u64;
    for j in 0..p {
        let n_j = schedule[j];
        if n_j == 0 {
            continue;
        }
        let mut sum = 0.0;
        for _ in 0..n_j {
            sum += oracle.query(ansatz, theta, &[j])?;
        }
        vector[j] = sum / n_j as f64;
        queries += n_j;
    }
    Ok(GradientSample {
        vector,
        queries_used: queries,
    })
}

/// Stream of stochastic gradient estimates consumed by the optimizers.
pub trait GradientSource {
    fn sample(&mut self, theta: &[f64]) -> Result<GradientSample>;
    /// Dimension of the produced vectors.
    fn dimension(&self) -> usize;
}

/// Which estimator an oracle-backed source uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    OneQueryL1,
    MiniBatchL2,
}

/// Oracle-backed gradient source.
pub struct OracleGradient<'a> {
    pub oracle: &'a mut SamplingOracle,
    pub ansatz: &'a Ansatz,
    pub table: &'a GammaTable,
    pub kind: EstimatorKind,
    pub rng: ChaCha8Rng,
}

impl<'a> OracleGradient<'a> {
    pub fn new(
        oracle: &'a mut SamplingOracle,
        ansatz: &'a Ansatz,
        table: &'a GammaTable,
        kind: EstimatorKind,
        rng: ChaCha8Rng,
    ) -> Self {
        OracleGradient {
            oracle,
            ansatz,
            table,
            kind,
            rng,
        }
    }
}

impl GradientSource for OracleGradient<'_> {
    fn sample(&mut self, theta: &[f64]) -> Result<GradientSample> {
        match self.kind {
            EstimatorKind::OneQueryL1 => {
                estimate_grad_l1(self.oracle, self.ansatz, self.table, theta, &mut self.rng)
            }
            EstimatorKind::MiniBatchL2 => {
                estimate_grad_l2(self.oracle, self.ansatz, self.table, theta)
            }
        }
    }

    fn dimension(&self) -> usize {
        self.table.parameter_count()
    }
}

/// Noise-free gradient source for deterministic tests and baselines.
pub struct ExactGradient<F: FnMut(&[f64]) -> Vec<f64>> {
    pub gradient: F,
    pub dimension: usize,
}

impl<F: FnMut(&[f64]) -> Vec<f64>> GradientSource for ExactGradient<F> {
    fn sample(&mut self, theta: &[f64]) -> Result<GradientSample> {
        Ok(GradientSample {
            vector: (self.gradient)(theta),
            queries_used: 0,
        })
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Stream of unbiased objective-value samples (zeroth-order source).
pub trait ValueSource {
    /// Returns the sample and the queries consumed.
    fn sample(&mut self, theta: &[f64]) -> Result<(f64, u64)>;
}

/// Oracle-backed zeroth-order source.
pub struct OracleValue<'a> {
    pub oracle: &'a mut SamplingOracle,
    pub ansatz: &'a Ansatz,
}

impl ValueSource for OracleValue<'_> {
    fn sample(&mut self, theta: &[f64]) -> Result<(f64, u64)> {
        Ok((self.oracle.query(self.ansatz, theta, &[])?, 1))
    }
}

/// Noise-free value source for tests.
pub struct ExactValue<F: FnMut(&[f64]) -> f64>(pub F);

impl<F: FnMut(&[f64]) -> f64> ValueSource for ExactValue<F> {
    fn sample(&mut self, theta: &[f64]) -> Result<(f64, u64)> {
        Ok(((self.0)(theta), 1))
    }
}
