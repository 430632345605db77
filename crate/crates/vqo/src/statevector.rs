//! Dense complex statevector simulation.
//!
//! Qubit-index convention: qubit 0 is the **most significant** bit of the
//! amplitude index, so `prepare_basis(2, "10")` puts amplitude 1 at index
//! `0b10 = 2`. All operations preserve the norm to within
//! [`UNITARITY_TOLERANCE`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, PauliString, Phase};

/// Largest register accepted by [`StateVector::prepare_basis`].
pub const MAX_QUBITS: usize = 14;
/// Largest register for the dense multi-term pulse exponential.
pub const MAX_DENSE_PULSE_QUBITS: usize = 10;
/// Tolerance on `|‖s‖² − 1|` maintained by every operation.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
/// Largest imaginary residue tolerated when reading off an expectation.
pub const EXPECTATION_IMAG_TOLERANCE: f64 = 1e-10;

// One extra qubit headroom for internal ancilla circuits.
const MAX_INTERNAL_QUBITS: usize = MAX_QUBITS + 1;

/// Dense state of `n` qubits: `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state given as a bitstring, e.g. `"10"`.
    pub fn prepare_basis(n: usize, bits: &str) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits exceeds the configured maximum of {MAX_QUBITS}"
            )));
        }
        if bits.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "bitstring of length {} for {} qubits",
                bits.len(),
                n
            )));
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "bitstring may contain only 0/1, got '{other}'"
                    )))
                }
            }
        }
        Ok(Self::basis_index(n, index))
    }

    /// Build from raw amplitudes; must be normalized.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > MAX_INTERNAL_QUBITS || amps.len() != 1 << n {
            return Err(Error::Capacity(format!(
                "amplitude vector of length {} for {n} qubits",
                amps.len()
            )));
        }
        let s = StateVector { n, amps };
        if (s.norm_sq() - 1.0).abs() > UNITARITY_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized: ‖s‖² = {}",
                s.norm_sq()
            )));
        }
        Ok(s)
    }

    /// Basis state by amplitude index (qubit 0 = most significant bit).
    pub fn basis_index(n: usize, index: usize) -> Self {
        assert!(n <= MAX_INTERNAL_QUBITS);
        assert!(index < 1 << n);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Translate a per-qubit mask into an amplitude-index mask.
    fn index_mask(&self, qubit_mask: u64) -> usize {
        let mut m = 0usize;
        for q in 0..self.n {
            if qubit_mask >> q & 1 == 1 {
                m |= 1 << (self.n - 1 - q);
            }
        }
        m
    }

    fn check_string(&self, p: &PauliString) -> Result<()> {
        if p.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit operator on a {}-qubit state",
                p.qubit_count(),
                self.n
            )));
        }
        Ok(())
    }

    /// Apply the (phased) Pauli string in place: `s ← P s`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_string(p)?;
        let x = self.index_mask(p.x_mask());
        let z = self.index_mask(p.z_mask());
        let scale = p.normal_form_factor();
        if x == 0 {
            for (b, amp) in self.amps.iter_mut().enumerate() {
                let sign = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                *amp *= scale * sign;
            }
        } else {
            // (P s)[b] = i^e (-1)^{<z, b^x>} s[b^x]; process each pair once.
            for b in 0..self.amps.len() {
                let b2 = b ^ x;
                if b < b2 {
                    let f1 = sign_of(b2 & z) * scale;
                    let f2 = sign_of(b & z) * scale;
                    let (a1, a2) = (self.amps[b], self.amps[b2]);
                    self.amps[b] = f1 * a2;
                    self.amps[b2] = f2 * a1;
                }
            }
        }
        Ok(())
    }

    /// Apply `exp(-i P θ/2)` in place; `P` must carry unit phase `+1`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check_string(p)?;
        if p.phase() != Phase::PLUS_ONE {
            return Err(Error::InvalidArgument(
                "pauli rotation generator must have unit phase +1".into(),
            ));
        }
        if angle == 0.0 {
            return Ok(());
        }
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        let cos = Complex64::new(c, 0.0);
        let misin = Complex64::new(0.0, -s);
        let x = self.index_mask(p.x_mask());
        let z = self.index_mask(p.z_mask());
        let scale = p.normal_form_factor();
        if x == 0 {
            for (b, amp) in self.amps.iter_mut().enumerate() {
                let f = sign_of(b & z) * scale;
                *amp = (cos + misin * f) * *amp;
            }
        } else {
            for b in 0..self.amps.len() {
                let b2 = b ^ x;
                if b < b2 {
                    let f1 = sign_of(b2 & z) * scale;
                    let f2 = sign_of(b & z) * scale;
                    let (a1, a2) = (self.amps[b], self.amps[b2]);
                    self.amps[b] = cos * a1 + misin * f1 * a2;
                    self.amps[b2] = cos * a2 + misin * f2 * a1;
                }
            }
        }
        Ok(())
    }

    /// Apply the pulse `exp(-i A θ/2)` for a Hermitian `A`.
    ///
    /// Single-term sums dispatch to [`StateVector::apply_pauli_rotation`]
    /// (with any `-1` phase folded into the angle); multi-term sums go
    /// through a dense Hermitian eigendecomposition, capped at
    /// [`MAX_DENSE_PULSE_QUBITS`] qubits.
    pub fn apply_pulse(&mut self, a: &ObservableSum, angle: f64) -> Result<()> {
        if a.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit generator on a {}-qubit state",
                a.qubit_count(),
                self.n
            )));
        }
        if angle == 0.0 {
            return Ok(());
        }
        if a.term_count() == 1 {
            let (coeff, string) = &a.terms()[0];
            if string.is_identity_letters() {
                // exp(-i c(±1) θ/2) is a global phase.
                let sign = string.phase().real_sign().expect("observable term is Hermitian");
                let phase = Complex64::from_polar(1.0, -sign * coeff * angle / 2.0);
                for amp in &mut self.amps {
                    *amp *= phase;
                }
                return Ok(());
            }
            let sign = string.phase().real_sign().expect("observable term is Hermitian");
            return self.apply_pauli_rotation(&string.with_unit_phase(), sign * coeff * angle);
        }
        if self.n > MAX_DENSE_PULSE_QUBITS {
            return Err(Error::Capacity(format!(
                "dense pulse exponential limited to {MAX_DENSE_PULSE_QUBITS} qubits, got {}",
                self.n
            )));
        }
        let dim = 1usize << self.n;
        let matrix = dense_matrix(a, self.n);
        let (eigvals, eigvecs) = hermitian_eigen(&matrix, dim)?;
        // s ← V exp(-i λ θ/2) V† s
        let mut in_eigen = vec![Complex64::new(0.0, 0.0); dim];
        for (k, coeff) in in_eigen.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..dim {
                acc += eigvecs[b * dim + k].conj() * self.amps[b];
            }
            *coeff = acc;
        }
        for (k, coeff) in in_eigen.iter_mut().enumerate() {
            *coeff *= Complex64::from_polar(1.0, -eigvals[k] * angle / 2.0);
        }
        for b in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, coeff) in in_eigen.iter().enumerate() {
                acc += eigvecs[b * dim + k] * coeff;
            }
            self.amps[b] = acc;
        }
        Ok(())
    }

    /// Apply `P` on the branch where `control` reads 1.
    ///
    /// `P` is an `n`-qubit string that must act trivially on the control.
    pub fn apply_controlled_pauli(&mut self, control: usize, p: &PauliString) -> Result<()> {
        self.check_string(p)?;
        if control >= self.n {
            return Err(Error::InvalidArgument(format!(
                "control qubit {control} out of range for {} qubits",
                self.n
            )));
        }
        if p.support().contains(control) {
            return Err(Error::InvalidArgument(format!(
                "controlled Pauli acts on its own control qubit {control}"
            )));
        }
        let ctrl_bit = 1usize << (self.n - 1 - control);
        let x = self.index_mask(p.x_mask());
        let z = self.index_mask(p.z_mask());
        let scale = p.normal_form_factor();
        if x == 0 {
            for (b, amp) in self.amps.iter_mut().enumerate() {
                if b & ctrl_bit != 0 {
                    *amp *= sign_of(b & z) * scale;
                }
            }
        } else {
            for b in 0..self.amps.len() {
                if b & ctrl_bit == 0 {
                    continue;
                }
                let b2 = b ^ x;
                if b < b2 {
                    let f1 = sign_of(b2 & z) * scale;
                    let f2 = sign_of(b & z) * scale;
                    let (a1, a2) = (self.amps[b], self.amps[b2]);
                    self.amps[b] = f1 * a2;
                    self.amps[b2] = f2 * a1;
                }
            }
        }
        Ok(())
    }

    /// Expectation `⟨s|P|s⟩` of a Hermitian (real-phase) Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_string(p)?;
        let x = self.index_mask(p.x_mask());
        let z = self.index_mask(p.z_mask());
        let scale = p.normal_form_factor();
        // (P s)[b] = i^e (-1)^{<z, b^x>} s[b^x]; fold the dot product in.
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..self.amps.len() {
            acc += self.amps[b].conj() * (sign_of((b ^ x) & z) * scale) * self.amps[b ^ x];
        }
        if acc.im.abs() > EXPECTATION_IMAG_TOLERANCE {
            return Err(Error::Numeric(format!(
                "expectation has imaginary residue {}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// Expectation `Σ_i α_i ⟨s|P_i|s⟩` of an observable sum.
    pub fn expectation(&self, h: &ObservableSum) -> Result<f64> {
        if h.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit observable on a {}-qubit state",
                h.qubit_count(),
                self.n
            )));
        }
        let mut total = 0.0;
        for (coeff, string) in h.terms() {
            total += coeff * self.pauli_expectation(string)?;
        }
        Ok(total)
    }

    /// `⟨Y⟩` on a designated (ancilla) qubit.
    pub fn pauli_y_expectation_on_ancilla(&self, ancilla: usize) -> Result<f64> {
        self.pauli_expectation(&PauliString::single(self.n, ancilla, crate::pauli::Pauli::Y))
    }

    /// `⟨X⟩` on a designated (ancilla) qubit, used for even derivative orders.
    pub fn pauli_x_expectation_on_ancilla(&self, ancilla: usize) -> Result<f64> {
        self.pauli_expectation(&PauliString::single(self.n, ancilla, crate::pauli::Pauli::X))
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn sign_of(masked: usize) -> f64 {
    if masked.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn dense_matrix(a: &ObservableSum, n: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (coeff, string) in a.terms() {
        for col in 0..dim {
            let mut s = StateVector::basis_index(n, col);
            s.apply_pauli(string).expect("dimensions match");
            for (row, amp) in s.amps.iter().enumerate() {
                m[row * dim + col] += coeff * amp;
            }
        }
    }
    m
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix (row-major).
///
/// Returns eigenvalues and the column-eigenvector matrix `V` with
/// `A = V diag(λ) V†`. Adequate for the small dense-pulse registers.
fn hermitian_eigen(a: &[Complex64], dim: usize) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut m = a.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        v[k * dim + k] = Complex64::new(1.0, 0.0);
    }
    let scale: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += m[p * dim + q].norm_sqr();
            }
        }
        if off.sqrt() < tol {
            let eigvals: Vec<f64> = (0..dim).map(|k| m[k * dim + k].re).collect();
            return Ok((eigvals, v));
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq.norm() < tol / (dim as f64) {
                    continue;
                }
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                // Unitary 2x2 rotation annihilating m[p][q]:
                // diagonalize [[app, apq], [apq*, aqq]].
                let phi = apq.arg();
                let r = apq.norm();
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let e = Complex64::from_polar(1.0, phi);
                // Columns: p' = c·p + s·e·q ; q' = -s·e*·p... applied as
                // conjugation m ← G† m G with G acting on columns p,q.
                for row in 0..dim {
                    let mp = m[row * dim + p];
                    let mq = m[row * dim + q];
                    m[row * dim + p] = c * mp - s * e.conj() * mq;
                    m[row * dim + q] = s * mp + c * e.conj() * mq;
                }
                for col in 0..dim {
                    let pm = m[p * dim + col];
                    let qm = m[q * dim + col];
                    m[p * dim + col] = c * pm - s * e * qm;
                    m[q * dim + col] = s * pm + c * e * qm;
                }
                for row in 0..dim {
                    let vp = v[row * dim + p];
                    let vq = v[row * dim + q];
                    v[row * dim + p] = c * vp - s * e.conj() * vq;
                    v[row * dim + q] = s * vp + c * e.conj() * vq;
                }
            }
        }
    }
    Err(Error::Numeric(
        "Jacobi eigendecomposition did not converge".into(),
    ))
}
