use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{Error, Result};

/// A gate angle slot: either a reference into the circuit's parameter vector
/// or a literal value baked into the gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParamRepr", into = "ParamRepr")]
pub enum Param {
    Free(usize),
    Fixed(f64),
}

impl Param {
    /// Resolve against a parameter vector.
    pub fn resolve(self, params: &[f64]) -> Result<f64> {
        match self {
            Param::Fixed(x) => Ok(x),
            Param::Free(i) => params.get(i).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "parameter index {i} out of range (have {})",
                    params.len()
                ))
            }),
        }
    }

    pub fn free_index(self) -> Option<usize> {
        match self {
            Param::Free(i) => Some(i),
            Param::Fixed(_) => None,
        }
    }
}

/// Wire format: `{"free": 2}` or `{"fixed": 1.5707}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    Free { free: usize },
    Fixed { fixed: f64 },
}

impl From<ParamRepr> for Param {
    fn from(r: ParamRepr) -> Self {
        match r {
            ParamRepr::Free { free } => Param::Free(free),
            ParamRepr::Fixed { fixed } => Param::Fixed(fixed),
        }
    }
}

impl From<Param> for ParamRepr {
    fn from(p: Param) -> Self {
        match p {
            Param::Free(free) => ParamRepr::Free { free },
            Param::Fixed(fixed) => ParamRepr::Fixed { fixed },
        }
    }
}

/// The native gate set.
///
/// `Rz` is a virtual frame rotation (zero pulse duration). `Sq` is the
/// physical single-qubit gate, a full Euler rotation
/// `U(theta, phi, lambda) = Rz(phi) Ry(theta) Rz(lambda)` up to global phase.
/// `Rzx` is the cross-resonance two-qubit interaction
/// `exp(-i (theta/2) Z_control ⊗ X_target)`; `Cx` is the echoed CNOT.
/// `Measure` marks qubits read out at the end of the circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRepr", into = "GateRepr")]
pub enum Gate {
    Rz {
        qubit: usize,
        angle: Param,
    },
    Sq {
        qubit: usize,
        theta: Param,
        phi: Param,
        lambda: Param,
    },
    Rzx {
        control: usize,
        target: usize,
        angle: Param,
    },
    Cx {
        control: usize,
        target: usize,
    },
    Measure {
        qubits: Vec<usize>,
    },
}

impl Gate {
    /// Convenience constructor for a physical X rotation,
    /// `Rx(theta) = U(theta, -pi/2, pi/2)`.
    pub fn rx(qubit: usize, theta: Param) -> Gate {
        Gate::Sq {
            qubit,
            theta,
            phi: Param::Fixed(-std::f64::consts::FRAC_PI_2),
            lambda: Param::Fixed(std::f64::consts::FRAC_PI_2),
        }
    }

    /// Convenience constructor for a physical Y rotation,
    /// `Ry(theta) = U(theta, 0, 0)`.
    pub fn ry(qubit: usize, theta: Param) -> Gate {
        Gate::Sq {
            qubit,
            theta,
            phi: Param::Fixed(0.0),
            lambda: Param::Fixed(0.0),
        }
    }

    /// Hadamard as a physical gate: `U(pi/2, 0, pi)`.
    pub fn h(qubit: usize) -> Gate {
        Gate::Sq {
            qubit,
            theta: Param::Fixed(std::f64::consts::FRAC_PI_2),
            phi: Param::Fixed(0.0),
            lambda: Param::Fixed(std::f64::consts::PI),
        }
    }

    /// Pauli X as a physical gate: `U(pi, 0, pi)`.
    pub fn x(qubit: usize) -> Gate {
        Gate::Sq {
            qubit,
            theta: Param::Fixed(std::f64::consts::PI),
            phi: Param::Fixed(0.0),
            lambda: Param::Fixed(std::f64::consts::PI),
        }
    }

    /// Qubits the gate touches, in declaration order.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Rz { qubit, .. } | Gate::Sq { qubit, .. } => vec![*qubit],
            Gate::Rzx {
                control, target, ..
            }
            | Gate::Cx { control, target } => vec![*control, *target],
            Gate::Measure { qubits } => qubits.clone(),
        }
    }

    /// Angle slots of this gate, in a fixed order.
    pub fn params(&self) -> Vec<Param> {
        match self {
            Gate::Rz { angle, .. } | Gate::Rzx { angle, .. } => vec![*angle],
            Gate::Sq {
                theta, phi, lambda, ..
            } => vec![*theta, *phi, *lambda],
            Gate::Cx { .. } | Gate::Measure { .. } => vec![],
        }
    }

    /// Replace the angle slot `slot` (see [`Gate::params`] order).
    pub(crate) fn with_param(&self, slot: usize, value: Param) -> Gate {
        let mut gate = self.clone();
        match (&mut gate, slot) {
            (Gate::Rz { angle, .. }, 0) | (Gate::Rzx { angle, .. }, 0) => *angle = value,
            (Gate::Sq { theta, .. }, 0) => *theta = value,
            (Gate::Sq { phi, .. }, 1) => *phi = value,
            (Gate::Sq { lambda, .. }, 2) => *lambda = value,
            _ => panic!("no angle slot {slot} on {gate:?}"),
        }
        gate
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::InvalidArgument(format!(
                    "gate {self:?} addresses qubit {q} on a {n}-qubit register"
                )));
            }
        }
        match self {
            Gate::Rzx {
                control, target, ..
            }
            | Gate::Cx { control, target } => {
                if control == target {
                    return Err(Error::InvalidArgument(format!(
                        "two-qubit gate with control == target == {control}"
                    )));
                }
            }
            Gate::Measure { qubits } => {
                let mut seen = vec![false; n];
                for &q in qubits {
                    if seen[q] {
                        return Err(Error::InvalidArgument(format!(
                            "measure lists qubit {q} twice"
                        )));
                    }
                    seen[q] = true;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Wire format: `{"kind": "...", "qubits": [...], "param": ...}` where
/// `param` is absent for `cx`/`measure`, a single slot for `rz`/`rzx`,
/// and a `[theta, phi, lambda]` triple for `sq`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GateRepr {
    Rz { qubits: [usize; 1], param: Param },
    Sq { qubits: [usize; 1], param: [Param; 3] },
    Rzx { qubits: [usize; 2], param: Param },
    Cx { qubits: [usize; 2] },
    Measure { qubits: Vec<usize> },
}

impl TryFrom<GateRepr> for Gate {
    type Error = Error;

    fn try_from(r: GateRepr) -> Result<Self> {
        Ok(match r {
            GateRepr::Rz { qubits, param } => Gate::Rz {
                qubit: qubits[0],
                angle: param,
            },
            GateRepr::Sq { qubits, param } => Gate::Sq {
                qubit: qubits[0],
                theta: param[0],
                phi: param[1],
                lambda: param[2],
            },
            GateRepr::Rzx { qubits, param } => Gate::Rzx {
                control: qubits[0],
                target: qubits[1],
                angle: param,
            },
            GateRepr::Cx { qubits } => Gate::Cx {
                control: qubits[0],
                target: qubits[1],
            },
            GateRepr::Measure { qubits } => Gate::Measure { qubits },
        })
    }
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        match g {
            Gate::Rz { qubit, angle } => GateRepr::Rz {
                qubits: [qubit],
                param: angle,
            },
            Gate::Sq {
                qubit,
                theta,
                phi,
                lambda,
            } => GateRepr::Sq {
                qubits: [qubit],
                param: [theta, phi, lambda],
            },
            Gate::Rzx {
                control,
                target,
                angle,
            } => GateRepr::Rzx {
                qubits: [control, target],
                param: angle,
            },
            Gate::Cx { control, target } => GateRepr::Cx {
                qubits: [control, target],
            },
            Gate::Measure { qubits } => GateRepr::Measure { qubits },
        }
    }
}

/// Apply one gate to `state`, resolving free angle slots against `params`.
///
/// Returns a new state; the input is untouched. `Measure` is a no-op here.
pub fn apply_gate(state: &StateVector, gate: &Gate, params: &[f64]) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_resolved_in_place(gate, params)?;
    Ok(out)
}
