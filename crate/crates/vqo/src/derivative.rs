//! Derivative observables as nested commutators, and their evaluation.
//!
//! A k-th mixed partial of the objective expands as
//! `(i/2)^k Σ (Πβ)(α) ⟨[Q̃_{j_1},[…,[Q̃_{j_k}, P_l]…]]⟩` over term choices
//! from the pulse generators and the observable, where
//! `Q̃ = U_{(j+1):p} Q U_{(j+1):p}^†`. Expanding each commutator into
//! operator words and merging a word with its reverse (its adjoint) turns
//! the derivative into a real combination of `Re⟨w⟩` / `Im⟨w⟩` values, each
//! measurable by one generalized Hadamard test: an ancilla in `|+⟩`
//! controls the word factors and is read out in the X (real part) or Y
//! (imaginary part) basis.
//!
//! Terms whose supports are disjoint at any nesting level commute, so their
//! commutators vanish identically; they are pruned with the conservative
//! light-cone supports from [`Ansatz::lightcone_support`]. Evaluation runs
//! on a register restricted to the backward light cone of the surviving
//! factors, which keeps the common product-structured cases cheap.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, Pauli, PauliString, Phase, Support};
use crate::statevector::StateVector;

/// One unitary factor of an operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WordFactor {
    /// `U_{(j+1):p} Q^{(j)}_k U_{(j+1):p}^†` for pulse `j`, term `k`.
    Conjugated { pulse: usize, term: usize },
    /// Observable term `P_l`.
    Observable { term: usize },
}

/// Which part of `⟨w⟩` the ancilla readout estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureBasis {
    /// Ancilla X expectation: `Re⟨w⟩` (even derivative orders).
    Real,
    /// Ancilla Y expectation: `Im⟨w⟩` (odd derivative orders).
    Imag,
}

/// One sampleable term of a derivative expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeItem {
    pub word: Vec<WordFactor>,
    pub basis: MeasureBasis,
    /// Real weight; the derivative equals `Σ coeff · m` over all items,
    /// where `m` is the exact ancilla expectation of the item's circuit.
    pub coeff: f64,
}

/// Full expansion of one derivative, with the importance-sampling law.
#[derive(Debug, Clone)]
pub struct DerivativeTable {
    order: usize,
    items: Vec<DerivativeItem>,
    z_norm: f64,
    cdf: Vec<f64>,
}

impl DerivativeTable {
    /// Expand the derivative for sorted coordinate multiset `coords`.
    pub fn build(ansatz: &Ansatz, h: &ObservableSum, coords: &[usize]) -> Result<Self> {
        let mut sorted: Vec<usize> = coords.to_vec();
        sorted.sort_unstable();
        let r = sorted.len();
        if r == 0 {
            return Err(Error::InvalidArgument(
                "derivative table needs at least one coordinate".into(),
            ));
        }
        // Exactly real for even order, exactly imaginary for odd.
        let base = match r % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        } / 2f64.powi(r as i32);

        let cones: Vec<Vec<Support>> = sorted
            .iter()
            .map(|&j| {
                ansatz
                    .pulse(j)
                    .terms()
                    .iter()
                    .map(|(_, q)| ansatz.lightcone_support(j, q))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut words: BTreeMap<Vec<WordFactor>, Complex64> = BTreeMap::new();
        let mut term_choice = vec![0usize; r];
        'combo: loop {
            for l in 0..h.term_count() {
                let (alpha, p_l) = &h.terms()[l];
                // Prune from the innermost commutator outward: a level whose
                // cone is disjoint from everything inside it vanishes.
                let mut running = p_l.support();
                let mut keep = true;
                for level in (0..r).rev() {
                    let cone = cones[level][term_choice[level]];
                    if !cone.intersects(running) {
                        keep = false;
                        break;
                    }
                    running = running.union(cone);
                }
                if !keep {
                    continue;
                }
                let mut coeff = base * *alpha;
                for (level, &k) in term_choice.iter().enumerate() {
                    coeff *= ansatz.pulse(sorted[level]).terms()[k].0;
                }
                // Expand the nested commutator into signed words, innermost
                // level first.
                let mut expansion: Vec<(f64, Vec<WordFactor>)> =
                    vec![(1.0, vec![WordFactor::Observable { term: l }])];
                for level in (0..r).rev() {
                    let factor = WordFactor::Conjugated {
                        pulse: sorted[level],
                        term: term_choice[level],
                    };
                    let mut next = Vec::with_capacity(expansion.len() * 2);
                    for (sign, seq) in &expansion {
                        let mut left = Vec::with_capacity(seq.len() + 1);
                        left.push(factor);
                        left.extend_from_slice(seq);
                        next.push((*sign, left));
                        let mut right = seq.clone();
                        right.push(factor);
                        next.push((-*sign, right));
                    }
                    expansion = next;
                }
                for (sign, seq) in expansion {
                    let c = coeff * sign;
                    let mut rev = seq.clone();
                    rev.reverse();
                    if rev < seq {
                        *words.entry(rev).or_insert(Complex64::new(0.0, 0.0)) += c.conj();
                    } else {
                        *words.entry(seq).or_insert(Complex64::new(0.0, 0.0)) += c;
                    }
                }
            }
            // Advance the mixed-radix term choice.
            let mut level = 0;
            loop {
                if level == r {
                    break 'combo;
                }
                term_choice[level] += 1;
                if term_choice[level] < ansatz.pulse(sorted[level]).term_count() {
                    break;
                }
                term_choice[level] = 0;
                level += 1;
            }
        }

        let mut items = Vec::new();
        for (word, acc) in words {
            if acc.re != 0.0 {
                items.push(DerivativeItem {
                    word: word.clone(),
                    basis: MeasureBasis::Real,
                    coeff: acc.re,
                });
            }
            if acc.im != 0.0 {
                items.push(DerivativeItem {
                    word,
                    basis: MeasureBasis::Imag,
                    coeff: -acc.im,
                });
            }
        }
        let z_norm: f64 = items.iter().map(|it| it.coeff.abs()).sum();
        let mut cdf = Vec::with_capacity(items.len());
        let mut acc = 0.0;
        for it in &items {
            acc += it.coeff.abs();
            cdf.push(acc);
        }
        Ok(DerivativeTable {
            order: r,
            items,
            z_norm,
            cdf,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn items(&self) -> &[DerivativeItem] {
        &self.items
    }

    /// Normalization `Z_S`: the sum of the item coefficient magnitudes. The
    /// oracle's outputs for this derivative are `±Z_S`-valued.
    pub fn z_norm(&self) -> f64 {
        self.z_norm
    }

    /// Sample an item index with probability proportional to `|coeff|`.
    pub fn sample_index(&self, u: f64) -> usize {
        let target = u * self.z_norm;
        match self
            .cdf
            .binary_search_by(|probe| probe.partial_cmp(&target).expect("finite cdf"))
        {
            Ok(i) => (i + 1).min(self.items.len() - 1),
            Err(i) => i.min(self.items.len() - 1),
        }
    }
}

/// Backward closure of `initial` under the ansatz pulses: the set of qubits
/// whose preparation can influence amplitudes on `initial`.
fn backward_closure(ansatz: &Ansatz, initial: Support) -> Support {
    let mut cone = initial;
    for pulse in ansatz.pulses().iter().rev() {
        let sup = pulse.support();
        if sup.intersects(cone) {
            cone = cone.union(sup);
        }
    }
    cone
}

/// Register restricted to a light cone, plus one trailing ancilla qubit.
struct Scene {
    nloc: usize,
    anc: usize,
    /// Restricted generator and full angle per pulse; `None` when the pulse
    /// acts outside the cone.
    pulses_loc: Vec<Option<(ObservableSum, f64)>>,
    /// `|θ_C⟩ ⊗ |+⟩` on `nloc + 1` qubits.
    prepared: StateVector,
}

impl Scene {
    fn build(ansatz: &Ansatz, theta: &[f64], cone: Support) -> Result<Scene> {
        let qubits: Vec<usize> = cone.iter().filter(|&q| q < ansatz.qubit_count()).collect();
        let nloc = qubits.len();
        let mut local_of = vec![None; ansatz.qubit_count()];
        for (loc, &q) in qubits.iter().enumerate() {
            local_of[q] = Some(loc);
        }

        let start: Vec<char> = ansatz.start_bits().chars().collect();
        let mut index = 0usize;
        for &q in &qubits {
            index <<= 1;
            if start[q] == '1' {
                index |= 1;
            }
        }
        // Trailing ancilla in |+>.
        let dim = 1usize << (nloc + 1);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[index << 1] = Complex64::new(h, 0.0);
        amps[(index << 1) | 1] = Complex64::new(h, 0.0);
        let mut prepared = StateVector::from_amplitudes(nloc + 1, amps)?;

        let mut pulses_loc = Vec::with_capacity(ansatz.parameter_count());
        for (j, pulse) in ansatz.pulses().iter().enumerate() {
            if pulse.support().intersects(cone) {
                let restricted = restrict_sum(pulse, &local_of, nloc + 1)?;
                pulses_loc.push(Some((restricted, theta[j] + ansatz.offsets()[j])));
            } else {
                pulses_loc.push(None);
            }
        }
        for entry in pulses_loc.iter().flatten() {
            prepared.apply_pulse(&entry.0, entry.1)?;
        }
        Ok(Scene {
            nloc,
            anc: nloc,
            pulses_loc,
            prepared,
        })
    }

    fn conjugation_forward(&self, state: &mut StateVector, j: usize) -> Result<()> {
        for entry in self.pulses_loc[j + 1..].iter().flatten() {
            state.apply_pulse(&entry.0, entry.1)?;
        }
        Ok(())
    }

    fn conjugation_backward(&self, state: &mut StateVector, j: usize) -> Result<()> {
        for entry in self.pulses_loc[j + 1..].iter().rev().flatten() {
            state.apply_pulse(&entry.0, -entry.1)?;
        }
        Ok(())
    }
}

fn restrict_string(
    s: &PauliString,
    local_of: &[Option<usize>],
    nloc_total: usize,
) -> Result<PauliString> {
    let mut letters = vec![Pauli::I; nloc_total];
    for q in 0..s.qubit_count() {
        let letter = s.letter(q);
        if letter != Pauli::I {
            let loc = local_of[q].ok_or_else(|| {
                Error::Numeric("operator support escapes its light cone".into())
            })?;
            letters[loc] = letter;
        }
    }
    let mut out = PauliString::from_letters(&letters);
    if s.phase() == Phase::MINUS_ONE {
        out = out.negated();
    } else if s.phase() != Phase::PLUS_ONE {
        return Err(Error::InvalidArgument(
            "only Hermitian (±1 phase) strings can be restricted".into(),
        ));
    }
    Ok(out)
}

fn restrict_sum(
    sum: &ObservableSum,
    local_of: &[Option<usize>],
    nloc_total: usize,
) -> Result<ObservableSum> {
    let terms = sum
        .terms()
        .iter()
        .map(|(c, s)| Ok((*c, restrict_string(s, local_of, nloc_total)?)))
        .collect::<Result<Vec<_>>>()?;
    ObservableSum::new(nloc_total, terms)
}

fn item_cone(ansatz: &Ansatz, h: &ObservableSum, item: &DerivativeItem) -> Result<Support> {
    let mut touched = Support::EMPTY;
    for factor in &item.word {
        let sup = match factor {
            WordFactor::Conjugated { pulse, term } => {
                let (_, q) = &ansatz.pulse(*pulse).terms()[*term];
                ansatz.lightcone_support(*pulse, q)?
            }
            WordFactor::Observable { term } => h.terms()[*term].1.support(),
        };
        touched = touched.union(sup);
    }
    Ok(backward_closure(ansatz, touched))
}

fn eval_on_scene(
    scene: &Scene,
    ansatz: &Ansatz,
    h: &ObservableSum,
    item: &DerivativeItem,
    local_of: &[Option<usize>],
) -> Result<f64> {
    let mut state = scene.prepared.clone();
    let width = scene.nloc + 1;
    // The word is an operator product; apply controlled factors right to
    // left so the |1> branch holds w|θ>.
    for factor in item.word.iter().rev() {
        match factor {
            WordFactor::Observable { term } => {
                let p = restrict_string(&h.terms()[*term].1, local_of, width)?;
                state.apply_controlled_pauli(scene.anc, &p)?;
            }
            WordFactor::Conjugated { pulse, term } => {
                let q = restrict_string(&ansatz.pulse(*pulse).terms()[*term].1, local_of, width)?;
                scene.conjugation_backward(&mut state, *pulse)?;
                state.apply_controlled_pauli(scene.anc, &q)?;
                scene.conjugation_forward(&mut state, *pulse)?;
            }
        }
    }
    match item.basis {
        MeasureBasis::Real => state.pauli_x_expectation_on_ancilla(scene.anc),
        MeasureBasis::Imag => state.pauli_y_expectation_on_ancilla(scene.anc),
    }
}

/// Exact ancilla expectation of one item's Hadamard-test circuit.
pub fn evaluate_one(
    ansatz: &Ansatz,
    h: &ObservableSum,
    theta: &[f64],
    item: &DerivativeItem,
) -> Result<f64> {
    let cone = item_cone(ansatz, h, item)?;
    let scene = Scene::build(ansatz, theta, cone)?;
    let mut local_of = vec![None; ansatz.qubit_count()];
    for (loc, q) in cone.iter().enumerate() {
        local_of[q] = Some(loc);
    }
    eval_on_scene(&scene, ansatz, h, item, &local_of)
}

/// Exact ancilla expectations for every item of a table at one `θ`.
pub fn evaluate_all(
    ansatz: &Ansatz,
    h: &ObservableSum,
    theta: &[f64],
    table: &DerivativeTable,
) -> Result<Vec<f64>> {
    let mut scenes: BTreeMap<u64, (Scene, Vec<Option<usize>>)> = BTreeMap::new();
    let mut out = Vec::with_capacity(table.items().len());
    for item in table.items() {
        let cone = item_cone(ansatz, h, item)?;
        if !scenes.contains_key(&cone.0) {
            let scene = Scene::build(ansatz, theta, cone)?;
            let mut local_of = vec![None; ansatz.qubit_count()];
            for (loc, q) in cone.iter().enumerate() {
                local_of[q] = Some(loc);
            }
            scenes.insert(cone.0, (scene, local_of));
        }
        let (scene, local_of) = &scenes[&cone.0];
        out.push(eval_on_scene(scene, ansatz, h, item, local_of)?);
    }
    Ok(out)
}

/// Exact `⟨θ|P_l|θ⟩` for observable term `l`, restricted to its light cone.
pub fn observable_term_expectation(
    ansatz: &Ansatz,
    h: &ObservableSum,
    theta: &[f64],
    l: usize,
) -> Result<f64> {
    pauli_expectation_restricted(ansatz, theta, &h.terms()[l].1)
}

/// Precomputed restricted evaluators for every term of an observable.
///
/// The light-cone restriction of each term does not depend on `θ`, so the
/// per-term registers and restricted pulse lists are built once; evaluating
/// `⟨θ|P_l|θ⟩` afterwards costs one small statevector pass. This is the hot
/// path of zeroth-order sampling.
pub struct TermEvaluator {
    scenes: Vec<TermScene>,
}

struct TermScene {
    nloc: usize,
    start_index: usize,
    /// `(global pulse index, restricted generator)` for cone pulses.
    pulses: Vec<(usize, ObservableSum)>,
    string: PauliString,
    /// `±1` for empty-support (identity) terms.
    trivial: Option<f64>,
}

impl TermEvaluator {
    pub fn build(ansatz: &Ansatz, h: &ObservableSum) -> Result<Self> {
        let start: Vec<char> = ansatz.start_bits().chars().collect();
        let mut scenes = Vec::with_capacity(h.term_count());
        for (_, string) in h.terms() {
            if string.support().is_empty() {
                let sign = string
                    .phase()
                    .real_sign()
                    .ok_or_else(|| Error::InvalidArgument("non-Hermitian phase".into()))?;
                scenes.push(TermScene {
                    nloc: 0,
                    start_index: 0,
                    pulses: Vec::new(),
                    string: *string,
                    trivial: Some(sign),
                });
                continue;
            }
            let cone = backward_closure(ansatz, string.support());
            let qubits: Vec<usize> = cone.iter().filter(|&q| q < ansatz.qubit_count()).collect();
            let nloc = qubits.len();
            let mut local_of = vec![None; ansatz.qubit_count()];
            for (loc, &q) in qubits.iter().enumerate() {
                local_of[q] = Some(loc);
            }
            let mut start_index = 0usize;
            for &q in &qubits {
                start_index <<= 1;
                if start[q] == '1' {
                    start_index |= 1;
                }
            }
            let mut pulses = Vec::new();
            for (j, pulse) in ansatz.pulses().iter().enumerate() {
                if pulse.support().intersects(cone) {
                    pulses.push((j, restrict_sum(pulse, &local_of, nloc)?));
                }
            }
            scenes.push(TermScene {
                nloc,
                start_index,
                pulses,
                string: restrict_string(string, &local_of, nloc)?,
                trivial: None,
            });
        }
        Ok(TermEvaluator { scenes })
    }

    /// Exact `⟨θ|P_l|θ⟩`.
    pub fn expectation(&self, ansatz: &Ansatz, theta: &[f64], l: usize) -> Result<f64> {
        let scene = &self.scenes[l];
        if let Some(sign) = scene.trivial {
            return Ok(sign);
        }
        let mut state = StateVector::basis_index(scene.nloc, scene.start_index);
        for (j, generator) in &scene.pulses {
            state.apply_pulse(generator, theta[*j] + ansatz.offsets()[*j])?;
        }
        state.pauli_expectation(&scene.string)
    }
}

/// Exact `⟨θ|P|θ⟩` for an arbitrary Hermitian string, restricted to the
/// backward light cone of its support.
pub fn pauli_expectation_restricted(
    ansatz: &Ansatz,
    theta: &[f64],
    p: &PauliString,
) -> Result<f64> {
    if p.support().is_empty() {
        return p
            .phase()
            .real_sign()
            .ok_or_else(|| Error::InvalidArgument("non-Hermitian phase".into()));
    }
    let cone = backward_closure(ansatz, p.support());
    let qubits: Vec<usize> = cone.iter().filter(|&q| q < ansatz.qubit_count()).collect();
    let nloc = qubits.len();
    let mut local_of = vec![None; ansatz.qubit_count()];
    for (loc, &q) in qubits.iter().enumerate() {
        local_of[q] = Some(loc);
    }
    let start: Vec<char> = ansatz.start_bits().chars().collect();
    let bits: String = qubits.iter().map(|&q| start[q]).collect();
    let mut state = StateVector::prepare_basis(nloc, &bits)?;
    for (j, pulse) in ansatz.pulses().iter().enumerate() {
        if pulse.support().intersects(cone) {
            let restricted = restrict_sum(pulse, &local_of, nloc)?;
            state.apply_pulse(&restricted, theta[j] + ansatz.offsets()[j])?;
        }
    }
    state.pauli_expectation(&restrict_string(p, &local_of, nloc)?)
}
