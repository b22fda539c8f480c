//! Circuit-to-pulse compilation: basis rewrites between CX and Rzx, Rzx
//! angle normalization into the short-duration range, and an ASAP scheduler
//! that turns a circuit into a pulse program with exact tick accounting.
//!
//! Scheduling conventions:
//!
//! * Rz gates are virtual frame changes and take zero time.
//! * Every other single-qubit gate occupies one fixed-length pulse slot on
//!   the qubit's drive channel. Consecutive slots on the same channel merge
//!   into one pulse (back-to-back rotations compose into a single waveform),
//!   so a run of single-qubit gates costs one slot.
//! * An Rzx gate is a single-qubit slot on both qubits, the cross-resonance
//!   tone on the pair's control channel, and a closing slot on both qubits.
//! * A CX gate is scheduled as the standard echoed sequence: two half-area
//!   tones separated by an echo slot on the control, with framing slots on
//!   both qubits. CX appears in schedules only when comparing against the
//!   CNOT basis; [`compile`] always rewrites it away first.
//!
//! Every emitted tone is passed through the duration quantizer, so all
//! instruction lengths are whole-tick multiples of the hardware granularity.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::pulse::{
    rzx_base_pulse, stretch_pulse, Channel, Dsr, GaussianSquarePulse, PulseInstruction,
    PulsePayload, PulseSchedule, DURATION_GRANULARITY,
};
use crate::quantum::{Angle, Circuit, Gate, Param};

/// A per-coupling-pair duration-stretch assignment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<DsrEntry>", into = "Vec<DsrEntry>")]
pub struct DsrAssignment {
    entries: BTreeMap<(usize, usize), Dsr>,
}

#[derive(Serialize, Deserialize)]
struct DsrEntry {
    control: usize,
    target: usize,
    dsr: Dsr,
}

impl From<Vec<DsrEntry>> for DsrAssignment {
    fn from(v: Vec<DsrEntry>) -> Self {
        let mut entries = BTreeMap::new();
        for e in v {
            entries.insert((e.control, e.target), e.dsr);
        }
        DsrAssignment { entries }
    }
}

impl From<DsrAssignment> for Vec<DsrEntry> {
    fn from(a: DsrAssignment) -> Self {
        a.entries
            .into_iter()
            .map(|((control, target), dsr)| DsrEntry {
                control,
                target,
                dsr,
            })
            .collect()
    }
}

impl DsrAssignment {
    /// The same stretch ratio on every listed pair.
    pub fn uniform(pairs: impl IntoIterator<Item = (usize, usize)>, dsr: Dsr) -> Self {
        DsrAssignment {
            entries: pairs.into_iter().map(|p| (p, dsr)).collect(),
        }
    }

    pub fn insert(&mut self, pair: (usize, usize), dsr: Dsr) {
        self.entries.insert(pair, dsr);
    }

    pub fn get(&self, pair: (usize, usize)) -> Option<Dsr> {
        self.entries.get(&pair).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), Dsr)> + '_ {
        self.entries.iter().map(|(&p, &d)| (p, d))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entries.keys().copied().collect()
    }

    fn require(&self, pair: (usize, usize)) -> Result<Dsr> {
        self.get(pair).ok_or_else(|| {
            Error::Configuration(format!(
                "no stretch ratio assigned for coupling pair ({}, {})",
                pair.0, pair.1
            ))
        })
    }
}

/// Result of mapping an Rzx angle into the directly drivable range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizedRzx {
    /// The rotation is the identity; the gate is dropped.
    Elided,
    /// Drive `Rzx(beta)` with `0 < |beta| <= pi/2`; when `corrections` is
    /// set, follow with Z on the control and X on the target (both commute
    /// with the rotation, and the pair shifts the angle by pi up to global
    /// phase). `beta == 0` with corrections means only the Z/X pair remains.
    Rotation { beta: Angle, corrections: bool },
}

/// Map any Rzx angle onto an equivalent rotation with `|beta| <= pi/2`.
///
/// The angle is first wrapped to `(-pi, pi]`. Magnitudes at or below a
/// quarter turn pass through; anything beyond is shifted by pi toward zero
/// and compensated with the Z (control) / X (target) correction pair.
/// Negative `beta` is realized downstream by inverting the tone's carrier
/// phase, not by a different shape.
pub fn normalize_rzx_angle(theta: Angle) -> NormalizedRzx {
    let t = theta.normalized();
    if t == 0.0 {
        return NormalizedRzx::Elided;
    }
    if t.abs() <= FRAC_PI_2 {
        NormalizedRzx::Rotation {
            beta: Angle::new(t),
            corrections: false,
        }
    } else {
        let beta = if t > 0.0 { t - PI } else { t + PI };
        NormalizedRzx::Rotation {
            beta: Angle::new(beta),
            corrections: true,
        }
    }
}

/// Replace every CX with its cross-resonance realization:
/// `CX = phase * Rz_c(pi/2) * Rx_t(pi/2) * Rzx(-pi/2)`.
///
/// All three factors commute, so the single-qubit corrections are emitted
/// after the rotation where they merge into its closing pulse slot. Circuits
/// without CX gates are returned unchanged.
pub fn rewrite_cnot_to_rzx(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.gates().len());
    for gate in c.gates() {
        match gate {
            Gate::Cx { control, target } => {
                gates.push(Gate::Rzx {
                    control: *control,
                    target: *target,
                    angle: Param::Fixed(-FRAC_PI_2),
                });
                gates.push(Gate::Rz {
                    qubit: *control,
                    angle: Param::Fixed(FRAC_PI_2),
                });
                gates.push(Gate::rx(*target, Param::Fixed(FRAC_PI_2)));
            }
            other => gates.push(other.clone()),
        }
    }
    Circuit::new(c.n(), gates, c.params().to_vec()).expect("rewrite preserves validity")
}

/// Replace every Rzx with its CNOT-basis realization:
/// `Rzx(theta) = (I ⊗ H) CX Rz_t(theta) CX (I ⊗ H)` (exact, no phase).
///
/// Used to express an Rzx-native circuit in the conventional basis for
/// duration comparisons.
pub fn rewrite_rzx_to_cnot(c: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(c.gates().len());
    for gate in c.gates() {
        match gate {
            Gate::Rzx {
                control,
                target,
                angle,
            } => {
                gates.push(Gate::h(*target));
                gates.push(Gate::Cx {
                    control: *control,
                    target: *target,
                });
                gates.push(Gate::Rz {
                    qubit: *target,
                    angle: *angle,
                });
                gates.push(Gate::Cx {
                    control: *control,
                    target: *target,
                });
                gates.push(Gate::h(*target));
            }
            other => gates.push(other.clone()),
        }
    }
    Circuit::new(c.n(), gates, c.params().to_vec()).expect("rewrite preserves validity")
}

/// Rewrite to the Rzx basis and normalize every Rzx angle, returning the
/// transformed circuit and the number of elided (identity) rotations.
///
/// The output contains no CX gates, its Rzx angles all satisfy
/// `0 < |beta| <= pi/2`, and it is unitarily equivalent to the input up to
/// global phase. Requires a fully bound circuit, since normalization
/// branches on angle values.
pub fn rzx_basis_circuit(c: &Circuit) -> Result<(Circuit, usize)> {
    let bound = c.bound()?;
    let rewritten = rewrite_cnot_to_rzx(&bound);
    let mut gates = Vec::with_capacity(rewritten.gates().len());
    let mut elided = 0usize;
    for gate in rewritten.gates() {
        match gate {
            Gate::Rzx {
                control,
                target,
                angle,
            } => {
                let theta = Angle::new(angle.resolve(&[])?);
                match normalize_rzx_angle(theta) {
                    NormalizedRzx::Elided => elided += 1,
                    NormalizedRzx::Rotation { beta, corrections } => {
                        if beta.radians() != 0.0 {
                            gates.push(Gate::Rzx {
                                control: *control,
                                target: *target,
                                angle: Param::Fixed(beta.radians()),
                            });
                        }
                        if corrections {
                            gates.push(Gate::Rz {
                                qubit: *control,
                                angle: Param::Fixed(PI),
                            });
                            gates.push(Gate::x(*target));
                        }
                    }
                }
            }
            other => gates.push(other.clone()),
        }
    }
    if elided > 0 {
        log::debug!("angle normalization elided {elided} identity rotation(s)");
    }
    Ok((Circuit::new(c.n(), gates, vec![])?, elided))
}

/// Concurrency report: for each control channel, how many ticks its tones
/// overlap with any other simultaneously playing tone.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScheduleStats {
    pub concurrent_cr_ticks: BTreeMap<String, u64>,
}

/// A scheduled circuit: the gate list, its pulse program, and the mapping
/// from each gate to the instructions realizing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledProgram {
    pub circuit: Circuit,
    pub schedule: PulseSchedule,
    /// Instruction indices per gate, in gate order. Merged single-qubit
    /// slots are shared, so an index may appear under several gates.
    pub gate_instructions: Vec<Vec<usize>>,
    /// The stretch assignment the schedule was built with.
    pub dsr: DsrAssignment,
    pub stats: ScheduleStats,
    /// Rotations dropped as exact identities during normalization.
    pub elided: usize,
}

impl CompiledProgram {
    pub fn total_duration(&self) -> u64 {
        self.schedule.total_duration()
    }

    /// Total tick span of the instructions realizing gate `index`.
    pub fn gate_ticks(&self, index: usize) -> u64 {
        self.gate_instructions[index]
            .iter()
            .map(|&i| self.schedule.instructions[i].duration_ticks())
            .sum()
    }
}

struct Scheduler<'d> {
    dev: &'d DeviceModel,
    dsr: &'d DsrAssignment,
    free: Vec<u64>,
    /// Per qubit: the open single-qubit pulse on its drive channel, if the
    /// last activity there was a slot ending at the qubit's free time.
    open_slot: Vec<Option<usize>>,
    instructions: Vec<PulseInstruction>,
}

impl<'d> Scheduler<'d> {
    fn new(dev: &'d DeviceModel, dsr: &'d DsrAssignment, n: usize) -> Self {
        Scheduler {
            dev,
            dsr,
            free: vec![0; n],
            open_slot: vec![None; n],
            instructions: Vec::new(),
        }
    }

    /// Place a single-qubit pulse slot on `q`, merging into an immediately
    /// preceding slot when one ends exactly at the qubit's free time.
    fn emit_slot(&mut self, q: usize) -> usize {
        if let Some(idx) = self.open_slot[q] {
            return idx;
        }
        let idx = self.instructions.len();
        self.instructions.push(PulseInstruction {
            channel: Channel::Drive(q),
            start: self.free[q],
            pulse: PulsePayload::Sq {
                duration: self.dev.sq_ticks(),
            },
        });
        self.free[q] += self.dev.sq_ticks();
        self.open_slot[q] = Some(idx);
        idx
    }

    fn emit_tone(
        &mut self,
        control: usize,
        target: usize,
        pulse: GaussianSquarePulse,
    ) -> usize {
        let start = self.free[control].max(self.free[target]);
        let ticks = pulse.duration().round() as u64;
        debug_assert_eq!(ticks % DURATION_GRANULARITY as u64, 0);
        let idx = self.instructions.len();
        self.instructions.push(PulseInstruction {
            channel: Channel::Control(control, target),
            start,
            pulse: PulsePayload::GaussianSquare { pulse },
        });
        self.free[control] = start + ticks;
        self.free[target] = start + ticks;
        self.open_slot[control] = None;
        self.open_slot[target] = None;
        idx
    }

    /// The pair's CR tone for `Rzx(beta)`, stretched per the assignment and
    /// quantized to the tick granularity. Negative angles flip the carrier
    /// phase only.
    fn rzx_tone(&self, control: usize, target: usize, beta: f64) -> Result<GaussianSquarePulse> {
        let dsr = self.dsr.require((control, target))?;
        let base = self.dev.base_pulse((control, target))?;
        let mut tone = rzx_base_pulse(Angle::new(beta.abs()), base)?;
        if beta < 0.0 {
            tone.phase += PI;
        }
        stretch_pulse(&tone, dsr)
    }

    fn schedule_gate(&mut self, gate: &Gate) -> Result<Vec<usize>> {
        match gate {
            // Virtual frame change and measurement markers: no pulse.
            Gate::Rz { .. } | Gate::Measure { .. } => Ok(vec![]),
            Gate::Sq { qubit, .. } => Ok(vec![self.emit_slot(*qubit)]),
            Gate::Rzx {
                control,
                target,
                angle,
            } => {
                let beta = angle.resolve(&[])?;
                if !(beta != 0.0 && beta.abs() <= FRAC_PI_2) {
                    return Err(Error::Contract(format!(
                        "scheduler requires normalized Rzx angles in (0, pi/2], got {beta}"
                    )));
                }
                let tone = self.rzx_tone(*control, *target, beta)?;
                let mut idx = vec![self.emit_slot(*control), self.emit_slot(*target)];
                idx.push(self.emit_tone(*control, *target, tone));
                idx.push(self.emit_slot(*control));
                idx.push(self.emit_slot(*target));
                Ok(idx)
            }
            Gate::Cx { control, target } => {
                // Echoed realization: framing slots, half-area tone, echo
                // slot on the control, second half-area tone, closing slots.
                let half = |s: &Self| -> Result<GaussianSquarePulse> {
                    let base = s.dev.base_pulse((*control, *target))?;
                    stretch_pulse(&rzx_base_pulse(Angle::new(FRAC_PI_4), base)?, Dsr::ONE)
                };
                let tone = half(self)?;
                let mut idx = vec![self.emit_slot(*control), self.emit_slot(*target)];
                idx.push(self.emit_tone(*control, *target, tone.clone()));
                idx.push(self.emit_slot(*control));
                idx.push(self.emit_tone(*control, *target, tone));
                idx.push(self.emit_slot(*control));
                idx.push(self.emit_slot(*target));
                Ok(idx)
            }
        }
    }
}

fn concurrency_stats(instructions: &[PulseInstruction]) -> ScheduleStats {
    let tones: Vec<(&PulseInstruction, u64, u64)> = instructions
        .iter()
        .filter(|i| matches!(i.channel, Channel::Control(..)))
        .map(|i| (i, i.start, i.end()))
        .collect();
    let mut concurrent_cr_ticks = BTreeMap::new();
    for (a, (ia, sa, ea)) in tones.iter().enumerate() {
        let mut overlap = 0u64;
        for (b, (_, sb, eb)) in tones.iter().enumerate() {
            if a != b {
                overlap += ea.min(eb).saturating_sub(*sa.max(sb));
            }
        }
        *concurrent_cr_ticks.entry(ia.channel.name()).or_insert(0) += overlap;
    }
    ScheduleStats {
        concurrent_cr_ticks,
    }
}

/// ASAP-schedule a circuit: every gate starts at the earliest tick at which
/// all its qubits are free.
///
/// Rzx angles must already be normalized (`0 < |beta| <= pi/2`); CX gates
/// are accepted and scheduled as echoed blocks so CNOT-basis circuits can
/// be timed for comparison. Requires a fully bound circuit.
pub fn schedule_asap(
    c: &Circuit,
    dsr: &DsrAssignment,
    dev: &DeviceModel,
) -> Result<CompiledProgram> {
    let bound = c.bound()?;
    if bound.n() > dev.n_qubits() {
        return Err(Error::Configuration(format!(
            "circuit uses {} qubits but the device has {}",
            bound.n(),
            dev.n_qubits()
        )));
    }
    let mut sched = Scheduler::new(dev, dsr, bound.n());
    let mut gate_instructions = Vec::with_capacity(bound.gates().len());
    for gate in bound.gates() {
        gate_instructions.push(sched.schedule_gate(gate)?);
    }
    let stats = concurrency_stats(&sched.instructions);
    Ok(CompiledProgram {
        circuit: bound,
        schedule: PulseSchedule {
            instructions: sched.instructions,
        },
        gate_instructions,
        dsr: dsr.clone(),
        stats,
        elided: 0,
    })
}

/// Full pipeline: rewrite to the Rzx basis, normalize angles, and schedule.
///
/// The result contains no CX gates and every CR pulse corresponds to an
/// angle with `0 < |beta| <= pi/2`.
pub fn compile(c: &Circuit, dsr: &DsrAssignment, dev: &DeviceModel) -> Result<CompiledProgram> {
    let (normalized, elided) = rzx_basis_circuit(c)?;
    let mut prog = schedule_asap(&normalized, dsr, dev)?;
    debug_assert!(!prog
        .circuit
        .gates()
        .iter()
        .any(|g| matches!(g, Gate::Cx { .. })));
    prog.elided = elided;
    Ok(prog)
}

/// Duration in ticks of a single `Rzx(theta)` on `pair`, after
/// normalization and scheduling. The backbone of the duration-vs-angle
/// curve.
pub fn rzx_duration_ticks(
    theta: Angle,
    pair: (usize, usize),
    dsr: Dsr,
    dev: &DeviceModel,
) -> Result<u64> {
    let n = pair.0.max(pair.1) + 1;
    let c = Circuit::new(
        n,
        vec![Gate::Rzx {
            control: pair.0,
            target: pair.1,
            angle: Param::Fixed(theta.radians()),
        }],
        vec![],
    )?;
    let assignment = DsrAssignment::uniform([pair], dsr);
    Ok(compile(&c, &assignment, dev)?.total_duration())
}
