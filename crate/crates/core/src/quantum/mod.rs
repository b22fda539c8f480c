//! Statevector simulation of small circuits over the gate set
//! {Rz, SQ, Rzx, CX, Measure}.
//!
//! Conventions used throughout the crate:
//!
//! * Qubit 0 is the least significant bit of a basis-state index, so the
//!   bitstring `"01"` on two qubits means qubit 0 is 1 and qubit 1 is 0.
//! * `Rzx(theta)` on `(control, target)` is `exp(-i (theta/2) Z_c ⊗ X_t)`.
//! * Pauli-string text such as `"ZX"` reads like a ket label: the leftmost
//!   character acts on the highest qubit.
//!
//! Everything here is exact-arithmetic simulation; sampling is the only
//! stochastic operation and is driven by an explicit seed.

mod angle;
mod circuit;
mod gate;
mod gradient;
mod observable;
mod state;
mod unitary;

pub use angle::Angle;
pub use circuit::Circuit;
pub use gate::{apply_gate, Gate, Param};
pub use gradient::parameter_shift_gradient;
pub use observable::{Observable, Pauli, PauliString};
pub use state::{bitstring, sample_counts, StateVector};
pub use unitary::{phase_aligned_distance, unitary_of};

use crate::error::Result;

/// Maximum qubit count the simulator accepts.
pub const MAX_QUBITS: usize = 14;

/// Run `circuit` on |0...0> and return the final state.
///
/// `Measure` gates are end-of-circuit markers and do not collapse the state;
/// use [`sample_counts`] on the result to draw shots.
pub fn simulate(circuit: &Circuit) -> Result<StateVector> {
    circuit.validate()?;
    let mut state = StateVector::zero(circuit.n())?;
    for gate in circuit.gates() {
        state.apply_resolved_in_place(gate, circuit.params())?;
    }
    Ok(state)
}
