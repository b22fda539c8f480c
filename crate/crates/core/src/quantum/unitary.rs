use nalgebra::DMatrix;
use num_complex::Complex64;

use super::circuit::Circuit;
use super::state::{run_gates, StateVector};
use crate::error::{Error, Result};

/// Largest register `unitary_of` accepts: dense extraction is quadratic in
/// the state size, so anything bigger belongs in statevector land.
pub const MAX_UNITARY_QUBITS: usize = 6;

/// Dense unitary of `circuit`, extracted column by column.
///
/// Column `c` is the state the circuit produces from basis state `|c>`.
/// `Measure` gates are ignored.
pub fn unitary_of(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    circuit.validate()?;
    let n = circuit.n();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Capacity(format!(
            "unitary extraction limited to {MAX_UNITARY_QUBITS} qubits, circuit has {n}"
        )));
    }
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let start = StateVector::from_amplitudes(amps)?;
        let end = run_gates(&start, circuit.gates(), circuit.params())?;
        for (row, amp) in end.amplitudes().iter().enumerate() {
            u[(row, col)] = *amp;
        }
    }
    Ok(u)
}

/// Frobenius distance between `a` and `b` after removing the global phase
/// that best aligns them.
///
/// The aligning phase is `arg tr(b^dagger a)`; for unitaries that are equal
/// up to global phase the result is zero to machine precision.
pub fn phase_aligned_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in unitary comparison");
    let mut tr = Complex64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            tr += b[(i, j)].conj() * a[(i, j)];
        }
    }
    let phase = if tr.norm() > 1e-300 {
        tr / tr.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut dist_sq = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dist_sq += (x - phase * y).norm_sqr();
    }
    dist_sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gate::{Gate, Param};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn identity_circuit_gives_identity_matrix() {
        let c = Circuit::new(2, vec![], vec![]).unwrap();
        let u = unitary_of(&c).unwrap();
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!(phase_aligned_distance(&u, &id) < 1e-14);
    }

    #[test]
    fn cx_unitary_is_the_permutation_matrix() {
        let mut c = Circuit::new(2, vec![], vec![]).unwrap();
        c.push(Gate::Cx {
            control: 0,
            target: 1,
        })
        .unwrap();
        let u = unitary_of(&c).unwrap();
        // Control = qubit 0 (LSB): |01> <-> |11>, i.e. columns 1 and 3 swap.
        let one = Complex64::new(1.0, 0.0);
        assert!((u[(0, 0)] - one).norm() < 1e-15);
        assert!((u[(3, 1)] - one).norm() < 1e-15);
        assert!((u[(2, 2)] - one).norm() < 1e-15);
        assert!((u[(1, 3)] - one).norm() < 1e-15);
    }

    #[test]
    fn rzx_composes_additively() {
        // Rzx(a) Rzx(b) = Rzx(a + b) on the same pair.
        let (a, b) = (0.63, -1.91);
        let mut lhs = Circuit::new(2, vec![], vec![]).unwrap();
        lhs.push(Gate::Rzx {
            control: 1,
            target: 0,
            angle: Param::Fixed(a),
        })
        .unwrap();
        lhs.push(Gate::Rzx {
            control: 1,
            target: 0,
            angle: Param::Fixed(b),
        })
        .unwrap();
        let mut rhs = Circuit::new(2, vec![], vec![]).unwrap();
        rhs.push(Gate::Rzx {
            control: 1,
            target: 0,
            angle: Param::Fixed(a + b),
        })
        .unwrap();
        let d = phase_aligned_distance(&unitary_of(&lhs).unwrap(), &unitary_of(&rhs).unwrap());
        assert!(d < 1e-12);
    }

    #[test]
    fn global_phase_is_ignored() {
        // Rz(2 pi) = -I; distance to the identity must vanish after alignment.
        let mut c = Circuit::new(1, vec![], vec![]).unwrap();
        c.push(Gate::Rz {
            qubit: 0,
            angle: Param::Fixed(2.0 * PI),
        })
        .unwrap();
        let u = unitary_of(&c).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!(phase_aligned_distance(&u, &id) < 1e-14);
        // ... while a genuinely different unitary keeps a large distance.
        let mut d = Circuit::new(1, vec![], vec![]).unwrap();
        d.push(Gate::rx(0, Param::Fixed(FRAC_PI_2))).unwrap();
        assert!(phase_aligned_distance(&unitary_of(&d).unwrap(), &id) > 0.5);
    }

    #[test]
    fn capacity_limit_is_enforced() {
        let c = Circuit::new(7, vec![], vec![]).unwrap();
        assert!(matches!(
            unitary_of(&c),
            Err(crate::error::Error::Capacity(_))
        ));
    }
}
