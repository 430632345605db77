//! The biased-field toy family with a hidden sign vector.
//!
//! For qubit count `n`, precision `ε ≤ 0.01n`, bias `δ = √(45ε/n)` and a
//! sign vector `v ∈ {−1,+1}ⁿ`, the observable is
//!
//! `H = −Σᵢ [sin(π/4 + vᵢδ) Xᵢ + cos(π/4 + vᵢδ) Zᵢ]`,
//!
//! a 2n-term 1-local sum with ground energy exactly `−n` and per-qubit
//! ground polarization `(sin(π/4+vᵢδ), 0, cos(π/4+vᵢδ))`. Under the
//! product-Y parameterization `⊗ exp(-i(θ_j+π/4) Y_j/2)|0…0⟩` the objective
//! takes the closed form `f(θ) = −Σ cos(θᵢ − δvᵢ)` with diagonal Hessian
//! `cos(θᵢ − δvᵢ)`, strongly convex on the box `‖θ‖∞ ≤ δ` since `δ < 0.7`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::Ansatz;
use crate::derivative;
use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, Pauli, PauliString};
use crate::rng;
use crate::statevector::StateVector;

/// One member of the family: sizes, bias, and the hidden sign vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyInstance {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    /// Entries in `{−1, +1}`.
    pub v: Vec<i8>,
    /// Seed used to draw `v`, when randomly generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ToyInstance {
    /// Ground energy of the built observable.
    pub fn ground_energy(&self) -> f64 {
        -(self.n as f64)
    }

    /// Parameter-space optimum `θ* = δ v`.
    pub fn optimum(&self) -> Vec<f64> {
        self.v.iter().map(|&vi| vi as f64 * self.delta).collect()
    }

    /// Strong-convexity modulus w.r.t. the 2-norm on the bias box:
    /// the Hessian diagonal is at least `cos 2δ` there.
    pub fn lambda2(&self) -> f64 {
        (2.0 * self.delta).cos()
    }

    /// Strong-convexity modulus w.r.t. the 1-norm: `λ₂/n`.
    pub fn lambda1(&self) -> f64 {
        self.lambda2() / self.n as f64
    }
}

/// The bias parameter `δ(ε) = √(45 ε / n)`.
pub fn bias_parameter(n: usize, eps: f64) -> f64 {
    (45.0 * eps / n as f64).sqrt()
}

/// Build one instance and its observable.
pub fn build_instance(n: usize, eps: f64, v: &[i8]) -> Result<(ToyInstance, ObservableSum)> {
    if n == 0 {
        return Err(Error::Config("instance needs at least one qubit".into()));
    }
    if eps <= 0.0 || eps > 0.01 * n as f64 {
        return Err(Error::Config(format!(
            "precision must satisfy 0 < ε ≤ 0.01 n = {}, got {eps}",
            0.01 * n as f64
        )));
    }
    if v.len() != n || v.iter().any(|&vi| vi != 1 && vi != -1) {
        return Err(Error::Config("sign vector must be ±1 of length n".into()));
    }
    let delta = bias_parameter(n, eps);
    let mut terms = Vec::with_capacity(2 * n);
    for (i, &vi) in v.iter().enumerate() {
        let angle = std::f64::consts::FRAC_PI_4 + vi as f64 * delta;
        terms.push((-angle.sin(), PauliString::single(n, i, Pauli::X)));
        terms.push((-angle.cos(), PauliString::single(n, i, Pauli::Z)));
    }
    let observable = ObservableSum::new(n, terms)?;
    let instance = ToyInstance {
        n,
        eps,
        delta,
        v: v.to_vec(),
        seed: None,
    };
    Ok((instance, observable))
}

/// Build an instance with a uniformly random sign vector.
pub fn random_instance(
    n: usize,
    eps: f64,
    seed: u64,
) -> Result<(ToyInstance, ObservableSum)> {
    let mut stream = rng::stream(seed, &[u64::from_le_bytes(*b"signvec\0")]);
    let v: Vec<i8> = (0..n).map(|_| if stream.gen_bool(0.5) { 1 } else { -1 }).collect();
    let (mut inst, obs) = build_instance(n, eps, &v)?;
    inst.seed = Some(seed);
    Ok((inst, obs))
}

/// The product-Y parameterization with the fixed quarter-turn offsets.
pub fn build_toy_ansatz(n: usize) -> Ansatz {
    let pulses: Vec<ObservableSum> = (0..n)
        .map(|j| {
            ObservableSum::new(n, vec![(1.0, PauliString::single(n, j, Pauli::Y))])
                .expect("single positive term")
        })
        .collect();
    Ansatz::with_offsets(
        n,
        &"0".repeat(n),
        pulses,
        vec![std::f64::consts::FRAC_PI_4; n],
    )
    .expect("valid product ansatz")
}

/// Closed-form objective `f(θ) = −Σ cos(θᵢ − δvᵢ)`.
pub fn closed_form_objective(inst: &ToyInstance, theta: &[f64]) -> f64 {
    theta
        .iter()
        .zip(&inst.v)
        .map(|(t, &vi)| -(t - inst.delta * vi as f64).cos())
        .sum()
}

/// Closed-form gradient, component `i`: `sin(θᵢ − δvᵢ)`.
pub fn closed_form_gradient(inst: &ToyInstance, theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(&inst.v)
        .map(|(t, &vi)| (t - inst.delta * vi as f64).sin())
        .collect()
}

/// Diagonal of the (diagonal) Hessian: `cos(θᵢ − δvᵢ)`.
pub fn closed_form_hessian_diag(inst: &ToyInstance, theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(&inst.v)
        .map(|(t, &vi)| (t - inst.delta * vi as f64).cos())
        .collect()
}

/// Suboptimality `f(θ) − (−n)` of a parameter point.
pub fn suboptimality(inst: &ToyInstance, theta: &[f64]) -> f64 {
    closed_form_objective(inst, theta) - inst.ground_energy()
}

/// True iff `θ` lies in the `c·ε`-optimum of the instance.
pub fn vicinity_member(inst: &ToyInstance, theta: &[f64], c: f64) -> bool {
    suboptimality(inst, theta) <= c * inst.eps
}

/// Hamming distance between sign vectors.
pub fn hamming(v: &[i8], w: &[i8]) -> usize {
    v.iter().zip(w).filter(|(a, b)| a != b).count()
}

/// Closed-form semimetric between two instances with shared bias:
/// `d(v, v') = 2 Δ(v, v') (1 − cos δ)`.
pub fn semimetric(v: &[i8], w: &[i8], delta: f64) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "sign vectors of length {} vs {}",
            v.len(),
            w.len()
        )));
    }
    Ok(2.0 * hamming(v, w) as f64 * (1.0 - delta.cos()))
}

/// A pairwise-separated subset of the hypercube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSet {
    pub vectors: Vec<Vec<i8>>,
    /// Minimum pairwise Hamming distance.
    pub min_distance: usize,
    /// Seed of the greedy construction.
    pub seed: u64,
}

impl PackingSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Packing parameter `β = min_{v≠v'} d(v,v') = 2 Δ_min (1 − cos δ)`.
    pub fn beta(&self, delta: f64) -> f64 {
        2.0 * self.min_distance as f64 * (1.0 - delta.cos())
    }
}

/// Target size `⌈e^{n/8}⌉` of the packing construction.
pub fn packing_target(n: usize) -> usize {
    (n as f64 / 8.0).exp().ceil() as usize
}

/// Greedy packing of the hypercube at Hamming distance `⌈n/4⌉`.
///
/// Candidates are visited in a seeded random order and kept when they are
/// far from everything kept so far, until `⌈e^{n/8}⌉` vectors are found.
/// Construction retries with derived seeds up to 10 times before failing.
pub fn gv_packing(n: usize, seed: u64) -> Result<PackingSet> {
    if n < 8 {
        return Err(Error::Config(format!("packing requires n ≥ 8, got {n}")));
    }
    let target = packing_target(n);
    let distance = (n + 3) / 4;
    for attempt in 0..10u64 {
        let mut stream = rng::stream(seed, &[u64::from_le_bytes(*b"gvpack\0\0"), attempt]);
        let kept = greedy_attempt(n, target, distance, &mut stream);
        if kept.len() >= target {
            let min_distance = kept
                .iter()
                .enumerate()
                .flat_map(|(i, a)| kept[i + 1..].iter().map(move |b| hamming(a, b)))
                .min()
                .unwrap_or(n);
            return Ok(PackingSet {
                vectors: kept,
                min_distance,
                seed,
            });
        }
    }
    Err(Error::Packing(format!(
        "could not reach {target} vectors at distance {distance} on {n} qubits"
    )))
}

fn greedy_attempt(
    n: usize,
    target: usize,
    distance: usize,
    stream: &mut ChaCha8Rng,
) -> Vec<Vec<i8>> {
    let mut kept: Vec<Vec<i8>> = Vec::with_capacity(target);
    if n <= 20 {
        // Enumerate the whole hypercube in shuffled order.
        let mut candidates: Vec<u64> = (0..1u64 << n).collect();
        for i in (1..candidates.len()).rev() {
            let j = stream.gen_range(0..=i);
            candidates.swap(i, j);
        }
        for bits in candidates {
            let v: Vec<i8> = (0..n)
                .map(|q| if bits >> q & 1 == 1 { 1 } else { -1 })
                .collect();
            if kept.iter().all(|w| hamming(&v, w) >= distance) {
                kept.push(v);
                if kept.len() >= target {
                    break;
                }
            }
        }
    } else {
        let attempts = 2000 * target;
        for _ in 0..attempts {
            let v: Vec<i8> = (0..n).map(|_| if stream.gen_bool(0.5) { 1 } else { -1 }).collect();
            if kept.iter().all(|w| hamming(&v, w) >= distance) {
                kept.push(v);
                if kept.len() >= target {
                    break;
                }
            }
        }
    }
    kept
}

/// Result of parameter identification.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyOutcome {
    /// Index of the winning vector in the packing.
    pub index: usize,
    pub vector: Vec<i8>,
    /// Whether the minimum was tied (broken by lowest index).
    pub tied: bool,
}

/// Identify the hidden sign vector from a parameter point: the packing
/// member whose observable expectation at `θ` is smallest.
pub fn identify_v_from_params(
    theta: &[f64],
    packing: &PackingSet,
    delta: f64,
) -> Result<IdentifyOutcome> {
    if packing.is_empty() {
        return Err(Error::InvalidArgument("empty packing".into()));
    }
    let energies: Vec<f64> = packing
        .vectors
        .iter()
        .map(|w| {
            theta
                .iter()
                .zip(w)
                .map(|(t, &wi)| -(t - delta * wi as f64).cos())
                .sum()
        })
        .collect();
    Ok(pick_argmin(&energies, packing))
}

/// Identification from an arbitrary state via exact expectations.
pub fn identify_v_from_state(
    state: &StateVector,
    packing: &PackingSet,
    eps: f64,
) -> Result<IdentifyOutcome> {
    if packing.is_empty() {
        return Err(Error::InvalidArgument("empty packing".into()));
    }
    let n = state.qubit_count();
    let mut energies = Vec::with_capacity(packing.len());
    for w in &packing.vectors {
        let (_, obs) = build_instance(n, eps, w)?;
        energies.push(state.expectation(&obs)?);
    }
    Ok(pick_argmin(&energies, packing))
}

fn pick_argmin(energies: &[f64], packing: &PackingSet) -> IdentifyOutcome {
    let mut best = 0usize;
    for (i, e) in energies.iter().enumerate().skip(1) {
        if *e < energies[best] {
            best = i;
        }
    }
    let tied = energies
        .iter()
        .enumerate()
        .any(|(i, e)| i != best && (*e - energies[best]).abs() <= 1e-12);
    IdentifyOutcome {
        index: best,
        vector: packing.vectors[best].clone(),
        tied,
    }
}

/// One sample of the coin-flip view of the zeroth-order oracle: pick a
/// qubit uniformly, flip a `(1 + vᵢ tan δ)/2` coin for X versus Z, measure
/// the negated Pauli on `|θ⟩`, and scale by `E = √2 n cos δ`.
///
/// Its outcome distribution is identical to a generic zeroth-order query on
/// the same observable.
pub fn coinflip_query(
    inst: &ToyInstance,
    ansatz: &Ansatz,
    theta: &[f64],
    stream: &mut ChaCha8Rng,
) -> Result<f64> {
    let n = inst.n;
    let e_norm = std::f64::consts::SQRT_2 * n as f64 * inst.delta.cos();
    let i = stream.gen_range(0..n);
    let heads_p = 0.5 * (1.0 + inst.v[i] as f64 * inst.delta.tan());
    let heads = stream.gen::<f64>() < heads_p;
    let letter = if heads { Pauli::X } else { Pauli::Z };
    let string = PauliString::single(n, i, letter).negated();
    let m = derivative::pauli_expectation_restricted(ansatz, theta, &string)?;
    let outcome = if stream.gen::<f64>() < (1.0 + m) / 2.0 {
        1.0
    } else {
        -1.0
    };
    Ok(e_norm * outcome)
}
