//! The black-box sampling oracle.
//!
//! A [`SamplingOracle`] encodes one objective observable `H`. Queried with a
//! parameterization, a parameter vector, and a coordinate multiset `S`, it
//! returns a single-measurement unbiased estimate of the objective
//! (`S = ∅`) or of the mixed partial derivative named by `S`:
//!
//! - order 0: a term `P_i` is drawn with probability `α_i/E` and measured on
//!   `|θ⟩`; the `±1` outcome is scaled by `E = Σα_i`.
//! - order ≥ 1: an expansion item is drawn with probability proportional to
//!   its coefficient magnitude and estimated with one generalized Hadamard
//!   test; the `±1` ancilla outcome is scaled by the expansion normalization
//!   (`Γ_j` at first order, `Z_S` in general).
//!
//! A physical two-outcome measurement with exact expectation `m` is
//! simulated as a Bernoulli draw returning `+1` with probability
//! `(1+m)/2`, which is distributionally identical for `±1`-valued
//! observables. Every call increments the query ledger by one, including
//! degenerate calls whose expansion is empty (those return exactly 0).

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{Ansatz, MAX_DERIVATIVE_ORDER};
use crate::derivative::{self, DerivativeTable, TermEvaluator};
use crate::error::{Error, Result};
use crate::pauli::ObservableSum;
use crate::rng;

const SEED_TAG_MEASUREMENT: u64 = u64::from_le_bytes(*b"measure\0");

/// Query counts by derivative order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryLedger {
    counts: [u64; MAX_DERIVATIVE_ORDER + 1],
}

impl QueryLedger {
    pub fn record(&mut self, order: usize) {
        self.counts[order] += 1;
    }

    pub fn by_order(&self, order: usize) -> u64 {
        self.counts.get(order).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts of all orders two and above, combined.
    pub fn higher_order(&self) -> u64 {
        self.counts[2..].iter().sum()
    }
}

/// Importance-sampling weights for first-order queries.
///
/// Row `j` holds `γ^{(j)}_{kl}` for every pulse term `k` and observable term
/// `l`: zero exactly when the light-cone support of term `k` is disjoint
/// from the support of `P_l`, else `β^{(j)}_k α_l`. `Γ_j` is the row sum and
/// `q^{(j)}_{kl} = γ/Γ_j` the per-row sampling distribution.
#[derive(Debug, Clone)]
pub struct GammaTable {
    rows: Vec<GammaRow>,
    e_norm: f64,
}

#[derive(Debug, Clone)]
pub struct GammaRow {
    /// `(k, l, γ)` for all pulse-term/observable-term pairs.
    pub entries: Vec<(usize, usize, f64)>,
    /// `Γ_j = Σ_{kl} γ^{(j)}_{kl}`.
    pub gamma_total: f64,
    /// `B_j = Σ_k β^{(j)}_k`.
    pub beta_total: f64,
}

impl GammaRow {
    /// Sampling probabilities aligned with `entries`; empty when `Γ_j = 0`.
    pub fn probabilities(&self) -> Vec<f64> {
        if self.gamma_total == 0.0 {
            return Vec::new();
        }
        self.entries
            .iter()
            .map(|(_, _, g)| g / self.gamma_total)
            .collect()
    }
}

impl GammaTable {
    /// Build the table for a parameterization/observable pair.
    pub fn build(ansatz: &Ansatz, h: &ObservableSum) -> Result<Self> {
        if h.qubit_count() != ansatz.qubit_count() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit observable with a {}-qubit ansatz",
                h.qubit_count(),
                ansatz.qubit_count()
            )));
        }
        let mut rows = Vec::with_capacity(ansatz.parameter_count());
        for j in 0..ansatz.parameter_count() {
            let mut entries = Vec::new();
            let mut gamma_total = 0.0;
            let mut beta_total = 0.0;
            for (k, (beta, q)) in ansatz.pulse(j).terms().iter().enumerate() {
                beta_total += beta;
                let cone = ansatz.lightcone_support(j, q)?;
                for (l, (alpha, p)) in h.terms().iter().enumerate() {
                    let gamma = if cone.intersects(p.support()) {
                        beta * alpha
                    } else {
                        0.0
                    };
                    gamma_total += gamma;
                    entries.push((k, l, gamma));
                }
            }
            rows.push(GammaRow {
                entries,
                gamma_total,
                beta_total,
            });
        }
        Ok(GammaTable {
            rows,
            e_norm: h.normalization(),
        })
    }

    pub fn rows(&self) -> &[GammaRow] {
        &self.rows
    }

    pub fn parameter_count(&self) -> usize {
        self.rows.len()
    }

    /// `E = Σ_i α_i` of the underlying observable.
    pub fn e_norm(&self) -> f64 {
        self.e_norm
    }

    /// The vector `Γ⃗ = (Γ_1, …, Γ_p)`.
    pub fn gamma_vec(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma_total).collect()
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.rows[j].gamma_total
    }

    pub fn l1_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.gamma_total).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.gamma_total * r.gamma_total)
            .sum::<f64>()
            .sqrt()
    }

    pub fn inf_norm(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.gamma_total))
    }
}

struct EvalCache {
    theta: Vec<f64>,
    values: Vec<Option<f64>>,
}

/// The sampling oracle `O_H` with a deterministic measurement stream.
pub struct SamplingOracle {
    h: ObservableSum,
    seed: u64,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
    zeroth_cdf: Vec<f64>,
    ansatz_fingerprint: Option<u64>,
    tables: HashMap<Vec<usize>, DerivativeTable>,
    evals: HashMap<Vec<usize>, EvalCache>,
    term_evaluator: Option<TermEvaluator>,
}

impl SamplingOracle {
    pub fn new(h: ObservableSum, seed: u64) -> Self {
        let mut acc = 0.0;
        let zeroth_cdf = h
            .terms()
            .iter()
            .map(|(alpha, _)| {
                acc += alpha;
                acc
            })
            .collect();
        SamplingOracle {
            h,
            seed,
            rng: rng::stream(seed, &[SEED_TAG_MEASUREMENT]),
            ledger: QueryLedger::default(),
            zeroth_cdf,
            ansatz_fingerprint: None,
            tables: HashMap::new(),
            evals: HashMap::new(),
            term_evaluator: None,
        }
    }

    pub fn observable(&self) -> &ObservableSum {
        &self.h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Snapshot of the query ledger.
    pub fn query_count(&self) -> QueryLedger {
        self.ledger
    }

    /// One unbiased sample of the objective (`coords = ∅`) or of the mixed
    /// partial named by `coords`. Output is `±C`-valued with
    /// `C = E`, `Γ_j`, or `Z_S` by order; the mean over calls equals
    /// [`Ansatz::exact_query_mean`].
    pub fn query(&mut self, ansatz: &Ansatz, theta: &[f64], coords: &[usize]) -> Result<f64> {
        self.query_traced(ansatz, theta, coords).map(|(v, _)| v)
    }

    /// Like [`SamplingOracle::query`], also reporting which expansion item
    /// (or observable term, at order 0) was selected; `None` for degenerate
    /// empty expansions.
    pub fn query_traced(
        &mut self,
        ansatz: &Ansatz,
        theta: &[f64],
        coords: &[usize],
    ) -> Result<(f64, Option<usize>)> {
        if theta.len() != ansatz.parameter_count() {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector of length {} for {} pulses",
                theta.len(),
                ansatz.parameter_count()
            )));
        }
        if coords.len() > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order: coords.len(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        for &j in coords {
            if j >= ansatz.parameter_count() {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {j} out of range for {} pulses",
                    ansatz.parameter_count()
                )));
            }
        }
        self.refresh_ansatz_guard(ansatz);

        if coords.is_empty() {
            self.ledger.record(0);
            let e = self.h.normalization();
            let u: f64 = self.rng.gen();
            let idx = cdf_index(&self.zeroth_cdf, u * e);
            if self.term_evaluator.is_none() {
                self.term_evaluator = Some(TermEvaluator::build(ansatz, &self.h)?);
            }
            let m = self
                .term_evaluator
                .as_ref()
                .expect("just built")
                .expectation(ansatz, theta, idx)?;
            let outcome = self.measure(m);
            return Ok((e * outcome, Some(idx)));
        }

        let mut key: Vec<usize> = coords.to_vec();
        key.sort_unstable();
        let order = key.len();
        if !self.tables.contains_key(&key) {
            let table = DerivativeTable::build(ansatz, &self.h, &key)?;
            self.tables.insert(key.clone(), table);
        }
        let (z_norm, item_count) = {
            let t = &self.tables[&key];
            (t.z_norm(), t.items().len())
        };
        self.ledger.record(order);
        if z_norm == 0.0 || item_count == 0 {
            // Every surviving term was pruned; the true derivative is 0.
            return Ok((0.0, None));
        }
        let u: f64 = self.rng.gen();
        let idx = self.tables[&key].sample_index(u);
        let (coeff_sign, m) = {
            let m = self.cached_table_value(ansatz, theta, &key, idx)?;
            let item = &self.tables[&key].items()[idx];
            (item.coeff.signum(), m)
        };
        let outcome = self.measure(m);
        Ok((coeff_sign * z_norm * outcome, Some(idx)))
    }

    /// First-order expansion normalization `Γ_j`, as the oracle samples it.
    pub fn gamma_for(&mut self, ansatz: &Ansatz, j: usize) -> Result<f64> {
        self.refresh_ansatz_guard(ansatz);
        let key = vec![j];
        if !self.tables.contains_key(&key) {
            let table = DerivativeTable::build(ansatz, &self.h, &key)?;
            self.tables.insert(key.clone(), table);
        }
        Ok(self.tables[&key].z_norm())
    }

    fn measure(&mut self, expectation: f64) -> f64 {
        let p_plus = (1.0 + expectation.clamp(-1.0, 1.0)) / 2.0;
        if self.rng.gen::<f64>() < p_plus {
            1.0
        } else {
            -1.0
        }
    }

    fn refresh_ansatz_guard(&mut self, ansatz: &Ansatz) {
        let fp = fingerprint(ansatz);
        if self.ansatz_fingerprint != Some(fp) {
            self.ansatz_fingerprint = Some(fp);
            self.tables.clear();
            self.evals.clear();
            self.term_evaluator = None;
        }
    }

    fn cached_table_value(
        &mut self,
        ansatz: &Ansatz,
        theta: &[f64],
        key: &[usize],
        idx: usize,
    ) -> Result<f64> {
        let item_count = self.tables[key].items().len();
        self.reset_eval_slot(key, theta, item_count);
        if let Some(v) = self.evals[key].values[idx] {
            return Ok(v);
        }
        let item = &self.tables[key].items()[idx];
        let v = derivative::evaluate_one(ansatz, &self.h, theta, item)?;
        self.evals.get_mut(key).expect("slot exists").values[idx] = Some(v);
        Ok(v)
    }

    fn reset_eval_slot(&mut self, key: &[usize], theta: &[f64], slots: usize) {
        let stale = match self.evals.get(key) {
            Some(c) => c.theta != theta,
            None => true,
        };
        if stale {
            self.evals.insert(
                key.to_vec(),
                EvalCache {
                    theta: theta.to_vec(),
                    values: vec![None; slots],
                },
            );
        }
    }
}

fn cdf_index(cdf: &[f64], target: f64) -> usize {
    match cdf.binary_search_by(|probe| probe.partial_cmp(&target).expect("finite cdf")) {
        Ok(i) => (i + 1).min(cdf.len() - 1),
        Err(i) => i.min(cdf.len() - 1),
    }
}

fn fingerprint(ansatz: &Ansatz) -> u64 {
    // Cheap structural mix; runs on every query, so SipHash is too heavy.
    let mut acc = rng::derive_seed(ansatz.qubit_count() as u64, &[]);
    let mut feed = |v: u64| acc = acc.rotate_left(7) ^ rng::derive_seed(v, &[]);
    for b in ansatz.start_bits().bytes() {
        feed(b as u64);
    }
    for pulse in ansatz.pulses() {
        for (c, s) in pulse.terms() {
            feed(c.to_bits());
            feed(s.x_mask());
            feed(s.z_mask());
            feed(s.i_exponent() as u64);
        }
    }
    for o in ansatz.offsets() {
        feed(o.to_bits());
    }
    acc
}
