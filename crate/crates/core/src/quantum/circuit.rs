use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::gate::{Gate, Param};
use super::MAX_QUBITS;
use crate::error::{Error, Result};

/// A gate list over `n` qubits plus the parameter vector its free angle
/// slots refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    params: Vec<f64>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, params: Vec<f64>) -> Result<Self> {
        let circuit = Circuit { n, gates, params };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params = params;
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.check_param_refs(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "qubit count {} outside supported range 1..={MAX_QUBITS}",
                self.n
            )));
        }
        for p in &self.params {
            if !p.is_finite() {
                return Err(Error::InvalidArgument("non-finite parameter".into()));
            }
        }
        for gate in &self.gates {
            gate.validate(self.n)?;
            self.check_param_refs(gate)?;
        }
        Ok(())
    }

    fn check_param_refs(&self, gate: &Gate) -> Result<()> {
        for slot in gate.params() {
            if let Some(i) = slot.free_index() {
                if i >= self.params.len() {
                    return Err(Error::InvalidArgument(format!(
                        "gate {gate:?} references parameter {i}, but only {} exist",
                        self.params.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Indices into the parameter vector that drive `Rzx` angles.
    ///
    /// This is the set the duration regularizer acts on.
    pub fn rzx_param_indices(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        for gate in &self.gates {
            if let Gate::Rzx { angle, .. } = gate {
                if let Some(i) = angle.free_index() {
                    seen.insert(i);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Angle slots bound to parameter `index`, as `(gate_idx, slot_idx)`.
    pub(crate) fn slots_for_param(&self, index: usize) -> Vec<(usize, usize)> {
        let mut slots = Vec::new();
        for (g, gate) in self.gates.iter().enumerate() {
            for (s, slot) in gate.params().into_iter().enumerate() {
                if slot.free_index() == Some(index) {
                    slots.push((g, s));
                }
            }
        }
        slots
    }

    /// A copy with every free slot replaced by its current value.
    pub fn bound(&self) -> Result<Circuit> {
        let mut gates = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let mut g = gate.clone();
            for (s, slot) in gate.params().into_iter().enumerate() {
                if let Param::Free(_) = slot {
                    g = g.with_param(s, Param::Fixed(slot.resolve(&self.params)?));
                }
            }
            gates.push(g);
        }
        Circuit::new(self.n, gates, Vec::new())
    }

    /// Qubits listed by `Measure` gates; all qubits when none are present.
    pub fn measured_qubits(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for gate in &self.gates {
            if let Gate::Measure { qubits } = gate {
                set.extend(qubits.iter().copied());
            }
        }
        if set.is_empty() {
            (0..self.n).collect()
        } else {
            set.into_iter().collect()
        }
    }

    /// Directed qubit pairs touched by `Rzx` or `Cx` gates, in first-use order.
    pub fn two_qubit_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for gate in &self.gates {
            let pair = match gate {
                Gate::Rzx {
                    control, target, ..
                }
                | Gate::Cx { control, target } => (*control, *target),
                _ => continue,
            };
            if !pairs.contains(&pair) {
                pairs.push(pair);
            }
        }
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::simulate;

    #[test]
    fn circuit_json_round_trip() {
        let mut c = Circuit::new(3, vec![], vec![0.4, -1.2]).unwrap();
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::Rzx {
            control: 2,
            target: 0,
            angle: Param::Free(1),
        })
        .unwrap();
        c.push(Gate::Measure {
            qubits: vec![0, 1, 2],
        })
        .unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: Circuit = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn bad_param_reference_is_rejected() {
        let mut c = Circuit::new(2, vec![], vec![0.1]).unwrap();
        let err = c.push(Gate::Rz {
            qubit: 0,
            angle: Param::Free(3),
        });
        assert!(err.is_err());
    }

    #[test]
    fn bound_copy_simulates_identically() {
        let mut c = Circuit::new(2, vec![], vec![0.7, 0.3]).unwrap();
        c.push(Gate::rx(0, Param::Free(0))).unwrap();
        c.push(Gate::Rzx {
            control: 1,
            target: 0,
            angle: Param::Free(1),
        })
        .unwrap();
        let direct = simulate(&c).unwrap();
        let bound = simulate(&c.bound().unwrap()).unwrap();
        for (a, b) in direct.amplitudes().iter().zip(bound.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn rzx_param_indices_ignores_fixed_and_non_rzx() {
        let mut c = Circuit::new(3, vec![], vec![0.0, 0.0, 0.0]).unwrap();
        c.push(Gate::rx(0, Param::Free(0))).unwrap();
        c.push(Gate::Rzx {
            control: 0,
            target: 1,
            angle: Param::Free(2),
        })
        .unwrap();
        c.push(Gate::Rzx {
            control: 1,
            target: 2,
            angle: Param::Fixed(0.5),
        })
        .unwrap();
        assert_eq!(c.rzx_param_indices(), vec![2]);
    }
}
