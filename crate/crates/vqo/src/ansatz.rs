//! Pulse-sequence state parameterizations.
//!
//! An [`Ansatz`] holds a starting basis state and an ordered list of `p`
//! Hermitian pulse generators; parameter `θ ∈ ℝ^p` prepares
//! `exp(-i A_p θ_p/2) ⋯ exp(-i A_1 θ_1/2) |Ψ⟩`. Pulse indices are 0-based
//! throughout the crate.

use crate::derivative;
use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, PauliString, Support};
use crate::statevector::StateVector;

/// Maximum mixed-derivative order supported by exact evaluation and the
/// sampling oracle.
pub const MAX_DERIVATIVE_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    n: usize,
    start: String,
    pulses: Vec<ObservableSum>,
    /// Fixed per-pulse angle offsets baked into preparation; pulse `j`
    /// applies `exp(-i A_j (θ_j + offset_j)/2)`.
    offsets: Vec<f64>,
}

impl Ansatz {
    pub fn new(n: usize, start: &str, pulses: Vec<ObservableSum>) -> Result<Self> {
        let offsets = vec![0.0; pulses.len()];
        Self::with_offsets(n, start, pulses, offsets)
    }

    pub fn with_offsets(
        n: usize,
        start: &str,
        pulses: Vec<ObservableSum>,
        offsets: Vec<f64>,
    ) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidArgument("ansatz needs at least one pulse".into()));
        }
        if start.len() != n || !start.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::InvalidArgument(format!(
                "start must be an {n}-bit string of 0/1, got '{start}'"
            )));
        }
        for (j, pulse) in pulses.iter().enumerate() {
            if pulse.qubit_count() != n {
                return Err(Error::DimensionMismatch(format!(
                    "pulse {j} acts on {} qubits, ansatz has {n}",
                    pulse.qubit_count()
                )));
            }
        }
        if offsets.len() != pulses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} offsets for {} pulses",
                offsets.len(),
                pulses.len()
            )));
        }
        Ok(Ansatz {
            n,
            start: start.to_string(),
            pulses,
            offsets,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    /// Number of pulses / variational parameters.
    pub fn parameter_count(&self) -> usize {
        self.pulses.len()
    }

    pub fn start_bits(&self) -> &str {
        &self.start
    }

    pub fn pulses(&self) -> &[ObservableSum] {
        &self.pulses
    }

    pub fn pulse(&self, j: usize) -> &ObservableSum {
        &self.pulses[j]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.pulses.len() {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector of length {} for {} pulses",
                theta.len(),
                self.pulses.len()
            )));
        }
        Ok(())
    }

    /// Prepare the variational state `|θ⟩`.
    pub fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_theta(theta)?;
        let mut state = StateVector::prepare_basis(self.n, &self.start)?;
        for (j, pulse) in self.pulses.iter().enumerate() {
            state.apply_pulse(pulse, theta[j] + self.offsets[j])?;
        }
        Ok(state)
    }

    /// Conservative support of `U_{(j+1):p} Q U_{(j+1):p}^†`.
    ///
    /// Starting from `support(Q)`, sweeps the pulses after `j` in order and
    /// unions in every pulse support that intersects the running set. Pulses
    /// with disjoint support commute through and cancel against their
    /// inverses, so the result over-approximates the true support.
    pub fn lightcone_support(&self, j: usize, q: &PauliString) -> Result<Support> {
        if j >= self.pulses.len() {
            return Err(Error::InvalidArgument(format!(
                "pulse index {j} out of range for {} pulses",
                self.pulses.len()
            )));
        }
        let mut cone = q.support();
        if cone.is_empty() {
            return Ok(cone);
        }
        for pulse in &self.pulses[j + 1..] {
            let sup = pulse.support();
            if sup.intersects(cone) {
                cone = cone.union(sup);
            }
        }
        Ok(cone)
    }

    /// Exact mean of an oracle query: the objective for `S = ∅`, otherwise
    /// the mixed partial derivative `∂^k f / ∂θ_{s_1}⋯∂θ_{s_k}`.
    ///
    /// Derivatives are evaluated through the same generalized Hadamard-test
    /// circuits the sampling oracle draws from, summed over all expansion
    /// terms. Orders above [`MAX_DERIVATIVE_ORDER`] are rejected.
    pub fn exact_query_mean(
        &self,
        h: &ObservableSum,
        theta: &[f64],
        coords: &[usize],
    ) -> Result<f64> {
        self.check_theta(theta)?;
        if h.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit observable with a {}-qubit ansatz",
                h.qubit_count(),
                self.n
            )));
        }
        if coords.len() > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order: coords.len(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        for &j in coords {
            if j >= self.pulses.len() {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {j} out of range for {} pulses",
                    self.pulses.len()
                )));
            }
        }
        if coords.is_empty() {
            let mut total = 0.0;
            for l in 0..h.term_count() {
                let (coeff, _) = h.terms()[l];
                total += coeff * derivative::observable_term_expectation(self, h, theta, l)?;
            }
            return Ok(total);
        }
        let table = derivative::DerivativeTable::build(self, h, coords)?;
        let values = derivative::evaluate_all(self, h, theta, &table)?;
        Ok(table
            .items()
            .iter()
            .zip(values.iter())
            .map(|(item, m)| item.coeff * m)
            .sum())
    }

    /// Parse the ansatz text format.
    ///
    /// Header `n p start=<bits>` (optionally `offsets=<f,f,...>`), then one
    /// generator per line; multi-term generators join `<coeff> <letters>`
    /// groups with `+`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty ansatz text".into()))?;
        let mut tokens = header.split_whitespace();
        let n: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("ansatz header must start with the qubit count".into()))?;
        let p: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("ansatz header must include the pulse count".into()))?;
        let mut start = None;
        let mut offsets = None;
        for token in tokens {
            if let Some(bits) = token.strip_prefix("start=") {
                start = Some(bits.to_string());
            } else if let Some(list) = token.strip_prefix("offsets=") {
                let parsed: std::result::Result<Vec<f64>, _> =
                    list.split(',').map(str::parse).collect();
                offsets = Some(parsed.map_err(|_| Error::Parse("bad offsets list".into()))?);
            } else {
                return Err(Error::Parse(format!("unknown header token '{token}'")));
            }
        }
        let start = start.ok_or_else(|| Error::Parse("ansatz header missing start=<bits>".into()))?;
        let mut pulses = Vec::with_capacity(p);
        for line in lines {
            let mut terms = Vec::new();
            for group in line.split('+') {
                let mut parts = group.split_whitespace();
                let coeff: f64 = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad generator term '{group}'")))?;
                if coeff <= 0.0 {
                    return Err(Error::Parse(format!(
                        "generator coefficient must be positive, got {coeff}"
                    )));
                }
                let letters = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("generator term '{group}' missing letters")))?;
                if parts.next().is_some() {
                    return Err(Error::Parse(format!("trailing tokens in term '{group}'")));
                }
                terms.push((coeff, PauliString::parse(letters)?));
            }
            pulses.push(ObservableSum::new(n, terms)?);
        }
        if pulses.len() != p {
            return Err(Error::Parse(format!(
                "header promised {p} pulses, found {}",
                pulses.len()
            )));
        }
        match offsets {
            Some(offs) => Self::with_offsets(n, &start, pulses, offs),
            None => Self::new(n, &start, pulses),
        }
    }

    /// Render in the format accepted by [`Ansatz::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} start={}", self.n, self.pulses.len(), self.start);
        if self.offsets.iter().any(|&o| o != 0.0) {
            let list: Vec<String> = self.offsets.iter().map(|o| o.to_string()).collect();
            out.push_str(&format!(" offsets={}", list.join(",")));
        }
        out.push('\n');
        for pulse in &self.pulses {
            let groups: Vec<String> = pulse
                .to_text()
                .lines()
                .map(|l| l.to_string())
                .collect();
            out.push_str(&groups.join(" + "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use crate::pauli::{Pauli, PauliString};
    use rand::Rng;

    /// Product-Y ansatz with the fixed quarter-turn offset per qubit.
    pub(crate) fn product_y(n: usize) -> Ansatz {
        let pulses: Vec<ObservableSum> = (0..n)
            .map(|j| {
                ObservableSum::new(n, vec![(1.0, PauliString::single(n, j, Pauli::Y))]).unwrap()
            })
            .collect();
        let offsets = vec![std::f64::consts::FRAC_PI_4; n];
        Ansatz::with_offsets(n, &"0".repeat(n), pulses, offsets).unwrap()
    }

    /// Random ansatz with single-Pauli pulses (exercises light cones).
    pub(crate) fn random_ansatz(n: usize, p: usize, rng: &mut impl Rng) -> Ansatz {
        let pulses: Vec<ObservableSum> = (0..p)
            .map(|_| {
                let nterms = rng.gen_range(1..=2);
                let terms: Vec<(f64, PauliString)> = (0..nterms)
                    .map(|_| {
                        let mut s = crate::pauli::test_dense::random_string(n, rng);
                        while s.support().is_empty() {
                            s = crate::pauli::test_dense::random_string(n, rng);
                        }
                        (rng.gen_range(0.2..1.5), s)
                    })
                    .collect();
                ObservableSum::new(n, terms).unwrap()
            })
            .collect();
        let start: String = (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        Ansatz::new(n, &start, pulses).unwrap()
    }

    /// Random observable with a few positive-coefficient terms.
    pub(crate) fn random_observable(n: usize, m: usize, rng: &mut impl Rng) -> ObservableSum {
        let terms: Vec<(f64, PauliString)> = (0..m)
            .map(|_| {
                let mut s = crate::pauli::test_dense::random_string(n, rng);
                while s.support().is_empty() {
                    s = crate::pauli::test_dense::random_string(n, rng);
                }
                (rng.gen_range(0.1..1.2), s)
            })
            .collect();
        ObservableSum::new(n, terms).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_fixtures::{product_y, random_ansatz, random_observable};
    use super::*;
    use crate::oracle::GammaTable;
    use crate::pauli::{Pauli, PauliString};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_y_at_zero_polarizes_along_x_plus_z() {
        let n = 3;
        let ansatz = product_y(n);
        let state = ansatz.prepare(&vec![0.0; n]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for q in 0..n {
            let x = state.pauli_expectation(&PauliString::single(n, q, Pauli::X)).unwrap();
            let z = state.pauli_expectation(&PauliString::single(n, q, Pauli::Z)).unwrap();
            assert!((x - h).abs() < 1e-12);
            assert!((z - h).abs() < 1e-12);
        }
    }

    #[test]
    fn single_pulse_at_zero_angle_is_identity() {
        let n = 2;
        let pulse = ObservableSum::new(n, vec![(1.0, PauliString::single(n, 0, Pauli::X))]).unwrap();
        let ansatz = Ansatz::new(n, "10", vec![pulse]).unwrap();
        let state = ansatz.prepare(&[0.0]).unwrap();
        let expected = crate::statevector::StateVector::prepare_basis(n, "10").unwrap();
        assert_eq!(state, expected);
    }

    #[test]
    fn lightcone_examples() {
        let n = 3;
        let ansatz = product_y(n);
        let y1 = PauliString::single(n, 1, Pauli::Y);
        assert_eq!(ansatz.lightcone_support(1, &y1).unwrap().iter().collect::<Vec<_>>(), vec![1]);
        assert!(ansatz
            .lightcone_support(0, &PauliString::identity(n))
            .unwrap()
            .is_empty());

        // Pulse 0 = Y0, pulse 1 = X0 X1: the cone of Y0 through pulse 1 grows.
        let p0 = ObservableSum::new(2, vec![(1.0, PauliString::single(2, 0, Pauli::Y))]).unwrap();
        let p1 = ObservableSum::new(
            2,
            vec![(1.0, PauliString::from_letters(&[Pauli::X, Pauli::X]))],
        )
        .unwrap();
        let a = Ansatz::new(2, "00", vec![p0, p1]).unwrap();
        let cone = a
            .lightcone_support(0, &PauliString::single(2, 0, Pauli::Y))
            .unwrap();
        assert_eq!(cone.iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    /// Independent route: ∂f/∂θ_j = -Σ_{k,l} β α Im⟨θ|Q̃ P|θ⟩ evaluated by
    /// whole-register statevector algebra, no ancilla, no restriction.
    fn direct_first_derivative(
        ansatz: &Ansatz,
        h: &ObservableSum,
        theta: &[f64],
        j: usize,
    ) -> f64 {
        let base = ansatz.prepare(theta).unwrap();
        let mut total = 0.0;
        for (beta, q) in ansatz.pulse(j).terms() {
            for (alpha, p) in h.terms() {
                let mut s = base.clone();
                s.apply_pauli(p).unwrap();
                for m in (j + 1..ansatz.parameter_count()).rev() {
                    s.apply_pulse(ansatz.pulse(m), -(theta[m] + ansatz.offsets()[m])).unwrap();
                }
                s.apply_pauli(q).unwrap();
                for m in j + 1..ansatz.parameter_count() {
                    s.apply_pulse(ansatz.pulse(m), theta[m] + ansatz.offsets()[m]).unwrap();
                }
                total -= beta * alpha * base.inner(&s).im;
            }
        }
        total
    }

    #[test]
    fn exact_first_derivative_matches_direct_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..12 {
            let n = rng.gen_range(2..=4);
            let p = rng.gen_range(1..=4);
            let ansatz = random_ansatz(n, p, &mut rng);
            let h = random_observable(n, rng.gen_range(1..=4), &mut rng);
            let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for j in 0..p {
                let exact = ansatz.exact_query_mean(&h, &theta, &[j]).unwrap();
                let direct = direct_first_derivative(&ansatz, &h, &theta, j);
                assert!(
                    (exact - direct).abs() < 1e-10,
                    "n={n} p={p} j={j}: {exact} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn exact_first_derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..8 {
            let n = rng.gen_range(2..=6);
            let p = rng.gen_range(1..=4);
            let ansatz = random_ansatz(n, p, &mut rng);
            let h = random_observable(n, rng.gen_range(1..=3), &mut rng);
            let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let hstep = 1e-4;
            for j in 0..p {
                let exact = ansatz.exact_query_mean(&h, &theta, &[j]).unwrap();
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[j] += hstep;
                tm[j] -= hstep;
                let fd = (ansatz.exact_query_mean(&h, &tp, &[]).unwrap()
                    - ansatz.exact_query_mean(&h, &tm, &[]).unwrap())
                    / (2.0 * hstep);
                let err = (exact - fd).abs();
                let tol = (1e-6 * exact.abs()).max(1e-7);
                assert!(err <= tol, "n={n} j={j}: exact {exact} fd {fd}");
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..6 {
            let n = rng.gen_range(2..=4);
            let p = rng.gen_range(2..=4);
            let ansatz = random_ansatz(n, p, &mut rng);
            let h = random_observable(n, 2, &mut rng);
            let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for j in 0..p {
                for k in j..p {
                    let a = ansatz.exact_query_mean(&h, &theta, &[k, j]).unwrap();
                    let b = ansatz.exact_query_mean(&h, &theta, &[j, k]).unwrap();
                    assert!((a - b).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn second_derivative_matches_central_difference_of_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let n = rng.gen_range(2..=3);
            let p = rng.gen_range(2..=3);
            let ansatz = random_ansatz(n, p, &mut rng);
            let h = random_observable(n, 2, &mut rng);
            let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let hstep = 1e-4;
            let j = rng.gen_range(0..p);
            let k = rng.gen_range(0..p);
            let exact = ansatz.exact_query_mean(&h, &theta, &[k, j]).unwrap();
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[k] += hstep;
            tm[k] -= hstep;
            let fd = (ansatz.exact_query_mean(&h, &tp, &[j]).unwrap()
                - ansatz.exact_query_mean(&h, &tm, &[j]).unwrap())
                / (2.0 * hstep);
            assert!((exact - fd).abs() <= (1e-5 * exact.abs()).max(1e-6), "{exact} vs {fd}");
        }
    }

    #[test]
    fn derivative_magnitude_bounded_by_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..6 {
            let n = rng.gen_range(2..=4);
            let p = rng.gen_range(1..=4);
            let ansatz = random_ansatz(n, p, &mut rng);
            let h = random_observable(n, 3, &mut rng);
            let table = GammaTable::build(&ansatz, &h).unwrap();
            for _ in 0..5 {
                let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect();
                for j in 0..p {
                    let d = ansatz.exact_query_mean(&h, &theta, &[j]).unwrap();
                    assert!(d.abs() <= table.gamma(j) + 1e-10);
                }
            }
        }
    }

    #[test]
    fn pruned_terms_have_zero_expectation() {
        // Pulse on qubit 0, observable on qubit 1: every γ entry prunes and
        // the true derivative is identically zero.
        let n = 2;
        let pulse = ObservableSum::new(n, vec![(1.0, PauliString::single(n, 0, Pauli::Y))]).unwrap();
        let ansatz = Ansatz::new(n, "00", vec![pulse]).unwrap();
        let h = ObservableSum::new(n, vec![(0.8, PauliString::single(n, 1, Pauli::Z))]).unwrap();
        let table = GammaTable::build(&ansatz, &h).unwrap();
        assert_eq!(table.gamma(0), 0.0);
        for theta in [-0.9f64, 0.3, 1.7] {
            let d = ansatz.exact_query_mean(&h, &[theta], &[0]).unwrap();
            assert!(d.abs() <= 1e-12);
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        let ansatz = product_y(2);
        let h = ObservableSum::new(2, vec![(1.0, PauliString::single(2, 0, Pauli::Z))]).unwrap();
        let r = ansatz.exact_query_mean(&h, &[0.0, 0.0], &[0, 0, 1, 1]);
        assert!(matches!(r, Err(crate::error::Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn text_format_round_trip() {
        let ansatz = product_y(3);
        let text = ansatz.to_text();
        let parsed = Ansatz::parse(&text).unwrap();
        assert_eq!(ansatz, parsed);
        let multi = "2 2 start=01\n1.0 YI + 0.5 XX\n0.7 -ZI\n";
        let a = Ansatz::parse(multi).unwrap();
        assert_eq!(a.parameter_count(), 2);
        assert_eq!(a.pulse(0).term_count(), 2);
        assert!(Ansatz::parse("2 3 start=01\n1.0 YI\n").is_err());
    }
}
