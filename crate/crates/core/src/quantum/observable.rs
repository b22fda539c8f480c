use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// A Pauli word over `n` qubits, stored per qubit index.
///
/// The text form reads like a ket label: `"ZX"` on two qubits puts Z on
/// qubit 1 and X on qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    /// Build from per-qubit operators (index = qubit).
    pub fn new(ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(PauliString(ops))
    }

    /// Parse text with the leftmost character on the highest qubit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ops = Vec::with_capacity(text.len());
        for ch in text.chars().rev() {
            ops.push(match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown Pauli character {other:?} in {text:?}"
                    )))
                }
            });
        }
        PauliString::new(ops)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn op(&self, qubit: usize) -> Pauli {
        self.0[qubit]
    }

    /// Qubits carrying a non-identity operator.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        PauliString::parse(&s)
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.0.iter()
            .rev()
            .map(|op| match op {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }
}

/// A real linear combination of Pauli words (a Hermitian observable).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("observable with no terms".into()));
        }
        let n = terms[0].1.n();
        for (coeff, word) in &terms {
            if !coeff.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {coeff}"
                )));
            }
            if word.n() != n {
                return Err(Error::InvalidArgument(format!(
                    "mixed Pauli-string lengths {} and {n}",
                    word.n()
                )));
            }
        }
        Ok(Observable { terms })
    }

    /// Convenience: single-qubit Z on `qubit` in an `n`-qubit register.
    pub fn single_z(n: usize, qubit: usize) -> Result<Self> {
        let mut ops = vec![Pauli::I; n];
        ops[qubit] = Pauli::Z;
        Observable::new(vec![(1.0, PauliString::new(ops)?)])
    }

    pub fn n(&self) -> usize {
        self.terms[0].1.n()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// <state| self |state>. The result is real up to numerical residue; an
    /// imaginary part above 1e-10 indicates internal inconsistency.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n() != self.n() {
            return Err(Error::InvalidArgument(format!(
                "observable on {} qubits applied to a {}-qubit state",
                self.n(),
                state.n()
            )));
        }
        let amps = state.amplitudes();
        let mut total = Complex64::new(0.0, 0.0);
        for (coeff, word) in &self.terms {
            let mut flip = 0usize; // X and Y flip the bit
            let mut zmask = 0usize; // Z and Y contribute (-1)^bit
            let mut ymask = 0usize; // Y contributes a factor i
            for q in 0..word.n() {
                match word.op(q) {
                    Pauli::I => {}
                    Pauli::X => flip |= 1 << q,
                    Pauli::Y => {
                        flip |= 1 << q;
                        zmask |= 1 << q;
                        ymask |= 1 << q;
                    }
                    Pauli::Z => zmask |= 1 << q,
                }
            }
            let ycount = ymask.count_ones() as usize;
            let iy = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ][ycount % 4];
            let mut term = Complex64::new(0.0, 0.0);
            for (x, amp) in amps.iter().enumerate() {
                let sign = if ((x & zmask).count_ones() & 1) == 1 {
                    -1.0
                } else {
                    1.0
                };
                term += amps[x ^ flip].conj() * amp * sign;
            }
            total += iy * term * *coeff;
        }
        debug_assert!(
            total.im.abs() < 1e-10,
            "expectation has imaginary residue {}",
            total.im
        );
        Ok(total.re)
    }
}
