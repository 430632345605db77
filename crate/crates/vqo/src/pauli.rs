//! Exact algebra for n-qubit Pauli strings and positively weighted sums.
//!
//! A [`PauliString`] is stored as an (x-mask, z-mask) bit pair together with
//! an integer exponent of `i`, so the represented operator is
//! `i^e · X^x Z^z` (per qubit, X factor left of Z). Products and commutation
//! checks are O(1) via popcounts. The letter `Y` on a qubit contributes a
//! set bit in both masks plus one factor of `i` (`Y = i·X·Z`), which keeps
//! letter-built strings at unit phase `+1`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// One of the four unit phases `{+1, +i, -1, -i}`, as an exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn value(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Real phases (`±1`) keep a Pauli string Hermitian.
    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        write!(f, "{s}")
    }
}

/// Set of qubit indices, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Support(pub u64);

impl Support {
    pub const EMPTY: Support = Support(0);

    pub fn single(q: usize) -> Self {
        Support(1u64 << q)
    }

    pub fn contains(self, q: usize) -> bool {
        self.0 >> q & 1 == 1
    }

    pub fn intersects(self, other: Support) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: Support) -> Support {
        Support(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |q| self.0 >> q & 1 == 1)
    }
}

impl FromIterator<usize> for Support {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut mask = 0u64;
        for q in iter {
            mask |= 1 << q;
        }
        Support(mask)
    }
}

/// Tensor product of Pauli operators with a tracked unit phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x_mask: u64,
    z_mask: u64,
    /// Exponent of `i` such that the operator equals `i^e · X^x Z^z`.
    i_exp: u8,
}

impl PauliString {
    const MAX_QUBITS: usize = 64;

    /// The identity on `n` qubits with phase `+1`.
    pub fn identity(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS);
        PauliString {
            n,
            x_mask: 0,
            z_mask: 0,
            i_exp: 0,
        }
    }

    /// Unit-phase string from per-qubit letters.
    pub fn from_letters(letters: &[Pauli]) -> Self {
        assert!(letters.len() <= Self::MAX_QUBITS);
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        let mut ys = 0u8;
        for (q, &l) in letters.iter().enumerate() {
            match l {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                    ys = ys.wrapping_add(1);
                }
                Pauli::Z => z_mask |= 1 << q,
            }
        }
        PauliString {
            n: letters.len(),
            x_mask,
            z_mask,
            i_exp: ys % 4,
        }
    }

    /// Single nontrivial letter at `qubit`, identity elsewhere, phase `+1`.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        assert!(qubit < n);
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Self::from_letters(&letters)
    }

    /// Parse letter text like `XIZ`, with an optional leading `-` sign.
    pub fn parse(text: &str) -> Result<Self> {
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let mut letters = Vec::with_capacity(body.len());
        for c in body.chars() {
            letters.push(match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("invalid Pauli letter '{other}'"))),
            });
        }
        if letters.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let mut s = Self::from_letters(&letters);
        if neg {
            s = s.negated();
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_mask >> q & 1 == 1, self.z_mask >> q & 1 == 1)
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Exponent of `i` in the `i^e · X^x Z^z` normal form.
    pub fn i_exponent(&self) -> u8 {
        self.i_exp
    }

    /// Complex value `i^e` of the normal-form prefactor.
    pub fn normal_form_factor(&self) -> Complex64 {
        Phase(self.i_exp).value()
    }

    /// Unit phase relative to the plain tensor product of letters.
    pub fn phase(&self) -> Phase {
        let ys = (self.x_mask & self.z_mask).count_ones() as u8;
        Phase((self.i_exp + 4 - ys % 4) % 4)
    }

    pub fn negated(&self) -> Self {
        PauliString {
            i_exp: (self.i_exp + 2) % 4,
            ..*self
        }
    }

    /// Same letters with phase reset to `+1`.
    pub fn with_unit_phase(&self) -> Self {
        let ys = (self.x_mask & self.z_mask).count_ones() as u8;
        PauliString {
            i_exp: ys % 4,
            ..*self
        }
    }

    pub fn is_identity_letters(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Qubits on which the string acts nontrivially.
    pub fn support(&self) -> Support {
        Support(self.x_mask | self.z_mask)
    }

    /// Product `self · other` with exact phase tracking.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "pauli product on {} vs {} qubits",
                self.n, other.n
            )));
        }
        // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        let swaps = (self.z_mask & other.x_mask).count_ones() as u8;
        Ok(PauliString {
            n: self.n,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            i_exp: (self.i_exp + other.i_exp + 2 * (swaps % 2)) % 4,
        })
    }

    /// True iff `ab = -ba`; for Pauli strings this is also `[a, b] != 0`.
    pub fn anticommutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "commutation check on {} vs {} qubits",
                self.n, other.n
            )));
        }
        let c = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        Ok(c % 2 == 1)
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        Ok(!self.anticommutes(other)?)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = self.phase();
        match phase {
            p if p == Phase::PLUS_ONE => {}
            p if p == Phase::MINUS_ONE => write!(f, "-")?,
            p => write!(f, "({p})")?,
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings with strictly positive coefficients.
///
/// Construction folds signs into the strings and merges duplicate strings by
/// adding coefficients, so the term order is deterministic for identical
/// inputs. Every term must be Hermitian, i.e. carry a real phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl ObservableSum {
    /// Build from `(coefficient, string)` pairs.
    ///
    /// Coefficients must be nonzero and finite; negative coefficients are
    /// absorbed into the string's phase. Complex (`±i`) phases are rejected.
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<(u64, u64, u8), f64> = BTreeMap::new();
        let mut order: Vec<(u64, u64, u8)> = Vec::new();
        for (coeff, string) in terms {
            if string.qubit_count() != n {
                return Err(Error::DimensionMismatch(format!(
                    "term on {} qubits in a {}-qubit observable",
                    string.qubit_count(),
                    n
                )));
            }
            if !coeff.is_finite() || coeff == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "observable coefficient must be nonzero and finite, got {coeff}"
                )));
            }
            if !string.phase().is_real() {
                return Err(Error::InvalidArgument(
                    "observable term must be Hermitian (phase ±1)".into(),
                ));
            }
            let (coeff, string) = if coeff < 0.0 {
                (-coeff, string.negated())
            } else {
                (coeff, string)
            };
            let key = (string.x_mask, string.z_mask, string.i_exp);
            if let Some(slot) = merged.get_mut(&key) {
                *slot += coeff;
            } else {
                merged.insert(key, coeff);
                order.push(key);
            }
        }
        let terms: Vec<(f64, PauliString)> = order
            .into_iter()
            .map(|key| {
                let coeff = merged[&key];
                (
                    coeff,
                    PauliString {
                        n,
                        x_mask: key.0,
                        z_mask: key.1,
                        i_exp: key.2,
                    },
                )
            })
            .collect();
        if terms.iter().any(|(c, _)| *c <= 0.0) {
            return Err(Error::InvalidArgument(
                "observable terms cancelled to a non-positive coefficient".into(),
            ));
        }
        let sum = Self { n, terms };
        if sum.terms.is_empty() {
            return Err(Error::InvalidArgument("observable has no terms".into()));
        }
        if !sum.normalization().is_finite() || sum.normalization() <= 0.0 {
            return Err(Error::InvalidArgument(
                "observable normalization must be finite and positive".into(),
            ));
        }
        Ok(sum)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Sum of the (positive) coefficients; upper bounds the operator norm.
    pub fn normalization(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c).sum()
    }

    /// Union of the supports of all terms.
    pub fn support(&self) -> Support {
        self.terms
            .iter()
            .fold(Support::EMPTY, |acc, (_, s)| acc.union(s.support()))
    }

    /// Parse the observable text format: one `<coeff> <letters>` per line.
    ///
    /// Blank lines and lines starting with `#` are skipped. Coefficients
    /// must be strictly positive; a leading `-` on the letters carries the
    /// folded sign (e.g. `0.5 -XIZ`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let coeff_text = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing coefficient", lineno + 1)))?;
            let letters = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing Pauli letters", lineno + 1)))?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            let coeff: f64 = coeff_text
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient '{coeff_text}'", lineno + 1)))?;
            if coeff <= 0.0 {
                return Err(Error::Parse(format!(
                    "line {}: coefficient must be positive, got {coeff}",
                    lineno + 1
                )));
            }
            let string = PauliString::parse(letters)?;
            let n_here = string.qubit_count();
            match n {
                None => n = Some(n_here),
                Some(prev) if prev != n_here => {
                    return Err(Error::Parse(format!(
                        "line {}: term has {} qubits, expected {}",
                        lineno + 1,
                        n_here,
                        prev
                    )));
                }
                _ => {}
            }
            terms.push((coeff, string));
        }
        let n = n.ok_or_else(|| Error::Parse("no observable terms found".into()))?;
        Self::new(n, terms)
    }

    /// Render in the text format accepted by [`ObservableSum::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (coeff, string) in &self.terms {
            let sign = if string.phase() == Phase::MINUS_ONE {
                "-"
            } else {
                ""
            };
            let letters: String = (0..self.n).map(|q| string.letter(q).as_char()).collect();
            out.push_str(&format!("{coeff} {sign}{letters}\n"));
        }
        out
    }
}
