//! Synthetic noisy device: executes compiled pulse programs shot by shot
//! against a model with per-pair control errors, duration-dependent
//! decoherence, readout flips, and slowly drifting parameters.
//!
//! The error model composes two mechanisms:
//!
//! * a coherent over-rotation of each CR tone — `Rzx(beta)` is realized as
//!   `Rzx(beta - sign(beta) * (k2 * (dsr - 1) + b))`, exactly zero at a full
//!   quarter turn — whose size drifts over "days"; and
//! * stochastic errors sampled per trajectory: a duration-scaled two-qubit
//!   Pauli after each CR tone (scale set by `1 - k1`), independent
//!   single-qubit Paulis after every pulse with probability
//!   `1 - exp(-duration / T1)` (with T2's excess dephasing folded into an
//!   extra Z branch), and a readout flip per measured bit.
//!
//! All randomness is ChaCha-seeded and consumed in a fixed pattern per
//! shot, so identical (program, snapshot, shots, seed) inputs give
//! bit-identical results, and runs that differ only in stretch ratios stay
//! draw-for-draw aligned — longer schedules can only add errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::compiler::CompiledProgram;
use crate::error::{Error, Result};
use crate::pulse::{Channel, Dsr, GaussianSquarePulse};
use crate::quantum::{Angle, Circuit, Gate, Param, StateVector};

/// Sample tick length in nanoseconds.
pub const DT_NS: f64 = 0.2222;

/// Default duration of one single-qubit pulse slot, in ticks.
pub const SQ_TICKS: u64 = 160;

/// Ground-truth control-error parameters of one directed coupling pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub base: GaussianSquarePulse,
    /// Clean-execution scale of the pair's stochastic error: the
    /// depolarizing probability after a full-length tone is `1 - k1`.
    pub k1: f64,
    /// Stretch sensitivity of the coherent over-rotation.
    pub k2: f64,
    /// Baseline over-rotation at dsr = 1.
    pub b: f64,
    /// Long-run means the drift process reverts to.
    pub mean_k1: f64,
    pub mean_k2: f64,
    pub mean_b: f64,
}

/// Per-qubit decoherence and readout parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub t1_us: f64,
    pub t2_us: f64,
    pub readout_flip: f64,
}

/// Mean-reverting drift process settings (shared by all pairs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSettings {
    /// Reversion rate per day; the process decorrelates over ~1/rate days.
    pub reversion_per_day: f64,
    /// Stationary standard deviations.
    pub sd_k1: f64,
    pub sd_k2: f64,
    pub sd_b: f64,
}

impl Default for DriftSettings {
    fn default() -> Self {
        DriftSettings {
            reversion_per_day: 0.08,
            sd_k1: 0.006,
            sd_k2: 0.025,
            sd_b: 0.018,
        }
    }
}

const K1_RANGE: (f64, f64) = (0.9, 0.9995);
const K2_RANGE: (f64, f64) = (0.02, 0.3);
const B_RANGE: (f64, f64) = (0.002, 0.12);

/// Immutable snapshot of the synthetic device at one point in "days".
///
/// `drift` produces a new snapshot; execution never mutates one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnapshotRepr", into = "SnapshotRepr")]
pub struct DeviceModel {
    n: usize,
    dt_ns: f64,
    sq_ticks: u64,
    clock_days: f64,
    pairs: BTreeMap<(usize, usize), PairParams>,
    qubits: Vec<QubitParams>,
    drift_settings: DriftSettings,
    rng_seed: u64,
    rng_word_pos: u128,
}

/// Wire format: pair map flattened to a list, RNG position as a decimal
/// string (JSON numbers cannot carry a u128).
#[derive(Serialize, Deserialize)]
struct SnapshotRepr {
    n: usize,
    dt_ns: f64,
    sq_ticks: u64,
    clock_days: f64,
    pairs: Vec<PairRepr>,
    qubits: Vec<QubitParams>,
    drift: DriftSettings,
    rng_seed: u64,
    rng_word_pos: String,
}

#[derive(Serialize, Deserialize)]
struct PairRepr {
    control: usize,
    target: usize,
    #[serde(flatten)]
    params: PairParams,
}

impl From<DeviceModel> for SnapshotRepr {
    fn from(d: DeviceModel) -> Self {
        SnapshotRepr {
            n: d.n,
            dt_ns: d.dt_ns,
            sq_ticks: d.sq_ticks,
            clock_days: d.clock_days,
            pairs: d
                .pairs
                .into_iter()
                .map(|((control, target), params)| PairRepr {
                    control,
                    target,
                    params,
                })
                .collect(),
            qubits: d.qubits,
            drift: d.drift_settings,
            rng_seed: d.rng_seed,
            rng_word_pos: d.rng_word_pos.to_string(),
        }
    }
}

impl TryFrom<SnapshotRepr> for DeviceModel {
    type Error = Error;

    fn try_from(r: SnapshotRepr) -> Result<Self> {
        let rng_word_pos = r.rng_word_pos.parse::<u128>().map_err(|_| Error::Schema {
            path: "rng_word_pos".into(),
            message: format!("not a decimal unsigned integer: {:?}", r.rng_word_pos),
        })?;
        let dev = DeviceModel {
            n: r.n,
            dt_ns: r.dt_ns,
            sq_ticks: r.sq_ticks,
            clock_days: r.clock_days,
            pairs: r
                .pairs
                .into_iter()
                .map(|p| ((p.control, p.target), p.params))
                .collect(),
            qubits: r.qubits,
            drift_settings: r.drift,
            rng_seed: r.rng_seed,
            rng_word_pos,
        };
        dev.validate()?;
        Ok(dev)
    }
}

impl DeviceModel {
    /// A line-coupled device with per-pair error truths sampled from the
    /// defaults. Identical (n, seed) inputs give identical devices.
    pub fn new_seeded(n: usize, seed: u64) -> Result<DeviceModel> {
        if !(2..=crate::quantum::MAX_QUBITS).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "device size {n} outside [2, {}]",
                crate::quantum::MAX_QUBITS
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = GaussianSquarePulse::new(0.25, 0.0, 32.0, 624.0, 128.0)?;
        let mut pairs = BTreeMap::new();
        for i in 0..n - 1 {
            let k1 = rng.gen_range(0.975..0.995);
            let k2 = rng.gen_range(0.06..0.14);
            let b = rng.gen_range(0.015..0.05);
            pairs.insert(
                (i, i + 1),
                PairParams {
                    base: base.clone(),
                    k1,
                    k2,
                    b,
                    mean_k1: k1,
                    mean_k2: k2,
                    mean_b: b,
                },
            );
        }
        let qubits = (0..n)
            .map(|_| {
                let t1: f64 = 112.36 * rng.gen_range(0.9..1.1);
                let t2 = (91.21_f64 * rng.gen_range(0.9..1.1)).min(2.0 * t1);
                QubitParams {
                    t1_us: t1,
                    t2_us: t2,
                    readout_flip: 0.006 * rng.gen_range(0.8..1.2),
                }
            })
            .collect();
        let dev = DeviceModel {
            n,
            dt_ns: DT_NS,
            sq_ticks: SQ_TICKS,
            clock_days: 0.0,
            pairs,
            qubits,
            drift_settings: DriftSettings::default(),
            rng_seed: seed,
            rng_word_pos: rng.get_word_pos(),
        };
        dev.validate()?;
        Ok(dev)
    }

    /// A line-coupled device with every error mechanism switched off.
    pub fn noiseless(n: usize) -> DeviceModel {
        let base = GaussianSquarePulse::new(0.25, 0.0, 32.0, 624.0, 128.0)
            .expect("default pulse is valid");
        let pairs = (0..n - 1)
            .map(|i| {
                (
                    (i, i + 1),
                    PairParams {
                        base: base.clone(),
                        k1: 1.0,
                        k2: 0.0,
                        b: 0.0,
                        mean_k1: 1.0,
                        mean_k2: 0.0,
                        mean_b: 0.0,
                    },
                )
            })
            .collect();
        DeviceModel {
            n,
            dt_ns: DT_NS,
            sq_ticks: SQ_TICKS,
            clock_days: 0.0,
            pairs,
            qubits: vec![
                QubitParams {
                    t1_us: 1e15,
                    t2_us: 1e15,
                    readout_flip: 0.0,
                };
                n
            ],
            drift_settings: DriftSettings::default(),
            rng_seed: 0,
            rng_word_pos: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |path: &str, message: String| Error::Schema {
            path: path.into(),
            message,
        };
        if self.n < 2 || self.qubits.len() != self.n {
            return Err(fail("qubits", format!("expected {} qubit entries", self.n)));
        }
        if !(self.dt_ns > 0.0) {
            return Err(fail("dt_ns", "must be positive".into()));
        }
        for ((c, t), p) in &self.pairs {
            let path = format!("pairs[{c}->{t}]");
            if *c >= self.n || *t >= self.n || c == t {
                return Err(fail(&path, "qubit indices out of range".into()));
            }
            if !(p.k1 > 0.0 && p.k1 <= 1.0) {
                return Err(fail(&path, format!("k1 = {} outside (0, 1]", p.k1)));
            }
            if p.k2.abs() > 0.5 {
                return Err(fail(&path, format!("|k2| = {} exceeds 0.5", p.k2.abs())));
            }
            if p.b.abs() > 0.2 {
                return Err(fail(&path, format!("|b| = {} exceeds 0.2", p.b.abs())));
            }
            // Worst-case over-rotation across the stretch range must stay a
            // small angle.
            let eps_max = p.k2.abs() * 0.5 + p.b.abs();
            if eps_max >= FRAC_PI_2 {
                return Err(fail(
                    &path,
                    format!("over-rotation bound {eps_max} reaches pi/2"),
                ));
            }
        }
        for (q, params) in self.qubits.iter().enumerate() {
            if !(params.t1_us > 0.0 && params.t2_us > 0.0) {
                return Err(fail(&format!("qubits[{q}]"), "T1 and T2 must be positive".into()));
            }
            if !(0.0..0.5).contains(&params.readout_flip) {
                return Err(fail(
                    &format!("qubits[{q}]"),
                    format!("readout flip {} outside [0, 0.5)", params.readout_flip),
                ));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn sq_ticks(&self) -> u64 {
        self.sq_ticks
    }

    pub fn dt_ns(&self) -> f64 {
        self.dt_ns
    }

    pub fn clock_days(&self) -> f64 {
        self.clock_days
    }

    pub fn duration_us(&self, ticks: u64) -> f64 {
        ticks as f64 * self.dt_ns / 1000.0
    }

    /// Directed coupling pairs, sorted.
    pub fn coupling_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.keys().copied().collect()
    }

    pub fn base_pulse(&self, pair: (usize, usize)) -> Result<&GaussianSquarePulse> {
        Ok(&self.pair_truth(pair)?.base)
    }

    pub fn pair_truth(&self, pair: (usize, usize)) -> Result<&PairParams> {
        self.pairs.get(&pair).ok_or_else(|| {
            Error::Configuration(format!(
                "pair ({}, {}) is not in the coupling map",
                pair.0, pair.1
            ))
        })
    }

    pub fn qubit(&self, q: usize) -> &QubitParams {
        &self.qubits[q]
    }

    /// Overwrite one pair's error truth (synthetic-scenario construction).
    pub fn set_pair_truth(&mut self, pair: (usize, usize), k1: f64, k2: f64, b: f64) -> Result<()> {
        let p = self.pairs.get_mut(&pair).ok_or_else(|| {
            Error::Configuration(format!(
                "pair ({}, {}) is not in the coupling map",
                pair.0, pair.1
            ))
        })?;
        p.k1 = k1;
        p.k2 = k2;
        p.b = b;
        p.mean_k1 = k1;
        p.mean_k2 = k2;
        p.mean_b = b;
        self.validate()
    }

    /// Overwrite one qubit's decoherence and readout parameters.
    pub fn set_qubit_noise(&mut self, q: usize, t1_us: f64, t2_us: f64, readout: f64) -> Result<()> {
        if q >= self.n {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        self.qubits[q] = QubitParams {
            t1_us,
            t2_us,
            readout_flip: readout,
        };
        self.validate()
    }

    /// Advance the device clock, moving every pair's (k1, k2, b) along a
    /// mean-reverting walk clamped to its valid range. Deterministic per
    /// snapshot: the walk consumes the snapshot's own RNG stream.
    pub fn drift(&self, days: f64) -> Result<DeviceModel> {
        if !(days >= 0.0) || !days.is_finite() {
            return Err(Error::InvalidArgument(format!("drift days {days} < 0")));
        }
        let mut next = self.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_word_pos(self.rng_word_pos);
        let decay = (-self.drift_settings.reversion_per_day * days).exp();
        let spread = (1.0 - decay * decay).sqrt();
        let s = &self.drift_settings;
        for params in next.pairs.values_mut() {
            let step = |value: f64, mean: f64, sd: f64, range: (f64, f64), rng: &mut ChaCha8Rng| {
                let z = normal_draw(rng);
                (mean + (value - mean) * decay + sd * spread * z).clamp(range.0, range.1)
            };
            params.k1 = step(params.k1, params.mean_k1, s.sd_k1, K1_RANGE, &mut rng);
            params.k2 = step(params.k2, params.mean_k2, s.sd_k2, K2_RANGE, &mut rng);
            params.b = step(params.b, params.mean_b, s.sd_b, B_RANGE, &mut rng);
        }
        next.clock_days += days;
        next.rng_word_pos = rng.get_word_pos();
        next.validate()?;
        Ok(next)
    }

    /// Execute a compiled program: per shot, sample a noise trajectory,
    /// evolve the state, and measure once (with readout flips).
    pub fn execute(&self, prog: &CompiledProgram, shots: u64, seed: u64) -> Result<ExecutionResult> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let run = self.prepare(prog)?;
        let measured = prog.circuit.measured_qubits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut clean_shots = 0u64;
        for _ in 0..shots {
            let (state, clean) = self.trajectory(&run, &mut rng)?;
            if clean {
                clean_shots += 1;
            }
            let probs = state.probabilities();
            let draw: f64 = rng.gen();
            let mut acc = 0.0;
            let mut outcome = probs.len() - 1;
            for (idx, p) in probs.iter().enumerate() {
                acc += p;
                if draw < acc {
                    outcome = idx;
                    break;
                }
            }
            let mut bits: Vec<u8> = measured
                .iter()
                .map(|&q| ((outcome >> q) & 1) as u8)
                .collect();
            for (slot, &q) in measured.iter().enumerate() {
                let flip: f64 = rng.gen();
                if flip < self.qubits[q].readout_flip {
                    bits[slot] ^= 1;
                }
            }
            // Leftmost character is the highest measured qubit.
            let key: String = bits
                .iter()
                .rev()
                .map(|b| if *b == 1 { '1' } else { '0' })
                .collect();
            *counts.entry(key).or_insert(0) += 1;
        }
        let duration_dt = prog.total_duration();
        Ok(ExecutionResult {
            counts,
            shots,
            duration_dt,
            duration_us: self.duration_us(duration_dt),
            clock_days: self.clock_days,
            fidelity_estimate: clean_shots as f64 / shots as f64,
        })
    }

    /// Benchmark a single `Rzx(theta)` on one pair: prepare |00>, play the
    /// gate at the given stretch, and return the probability of reading
    /// "00" on the pair, averaged over noise trajectories.
    ///
    /// Each trajectory contributes its exact outcome probability (readout
    /// confusion applied analytically), so the estimate carries only
    /// trajectory-sampling noise — an error-free device returns the ideal
    /// value to machine precision.
    pub fn benchmark_rzx(
        &self,
        pair: (usize, usize),
        theta: Angle,
        dsr: Dsr,
        shots: u64,
        seed: u64,
    ) -> Result<f64> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        self.pair_truth(pair)?;
        let n = pair.0.max(pair.1) + 1;
        let circuit = Circuit::new(
            n,
            vec![Gate::Rzx {
                control: pair.0,
                target: pair.1,
                angle: Param::Fixed(theta.radians()),
            }],
            vec![],
        )?;
        let assignment = crate::compiler::DsrAssignment::uniform([pair], dsr);
        let prog = crate::compiler::compile(&circuit, &assignment, self)?;
        let run = self.prepare(&prog)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pc, pt) = (
            self.qubits[pair.0].readout_flip,
            self.qubits[pair.1].readout_flip,
        );
        let mut total = 0.0;
        for _ in 0..shots {
            let (state, _) = self.trajectory(&run, &mut rng)?;
            // Joint distribution of the pair's bits.
            let mut joint = [0.0f64; 4];
            for (idx, amp) in state.amplitudes().iter().enumerate() {
                let c_bit = (idx >> pair.0) & 1;
                let t_bit = (idx >> pair.1) & 1;
                joint[c_bit * 2 + t_bit] += amp.norm_sqr();
            }
            let weight = |bit: usize, flip: f64| if bit == 0 { 1.0 - flip } else { flip };
            let mut p00 = 0.0;
            for c_bit in 0..2 {
                for t_bit in 0..2 {
                    p00 += joint[c_bit * 2 + t_bit] * weight(c_bit, pc) * weight(t_bit, pt);
                }
            }
            total += p00;
        }
        Ok(total / shots as f64)
    }

    /// Resolve a program against this snapshot: per-gate realized angles,
    /// per-instruction noise probabilities.
    fn prepare<'p>(&self, prog: &'p CompiledProgram) -> Result<PreparedRun<'p>> {
        let mut realized = Vec::with_capacity(prog.circuit.gates().len());
        for gate in prog.circuit.gates() {
            realized.push(match gate {
                Gate::Cx { .. } => {
                    return Err(Error::Contract(
                        "execution requires an Rzx-basis program (CX present)".into(),
                    ))
                }
                Gate::Rzx {
                    control,
                    target,
                    angle,
                } => {
                    let beta = angle.resolve(&[])?;
                    let truth = self.pair_truth((*control, *target))?;
                    let dsr = prog.dsr.get((*control, *target)).ok_or_else(|| {
                        Error::Configuration(format!(
                            "program lacks a stretch ratio for pair ({control}, {target})"
                        ))
                    })?;
                    let eps = if beta.abs() == FRAC_PI_2 {
                        0.0
                    } else {
                        truth.k2 * (dsr.value() - 1.0) + truth.b
                    };
                    debug_assert!(eps.abs() < FRAC_PI_2);
                    Some(Gate::Rzx {
                        control: *control,
                        target: *target,
                        angle: Param::Fixed(beta - beta.signum() * eps),
                    })
                }
                _ => None,
            });
        }
        let mut noise = Vec::with_capacity(prog.schedule.instructions.len());
        for instr in &prog.schedule.instructions {
            let ticks = instr.duration_ticks();
            noise.push(match instr.channel {
                Channel::Drive(q) => InstructionNoise {
                    qubits: vec![(q, self.pauli_probs(q, ticks))],
                    depolarize: None,
                },
                Channel::Control(c, t) => {
                    let truth = self.pair_truth((c, t))?;
                    let scale = ticks as f64 / truth.base.duration();
                    InstructionNoise {
                        qubits: vec![
                            (c, self.pauli_probs(c, ticks)),
                            (t, self.pauli_probs(t, ticks)),
                        ],
                        depolarize: Some(((1.0 - truth.k1) * scale).clamp(0.0, 1.0)),
                    }
                }
            });
        }
        Ok(PreparedRun {
            prog,
            realized,
            noise,
        })
    }

    /// Per-qubit (uniform-Pauli, extra-Z) probabilities for a pulse of the
    /// given length.
    fn pauli_probs(&self, q: usize, ticks: u64) -> (f64, f64) {
        let d_us = self.duration_us(ticks);
        let params = &self.qubits[q];
        let p1 = -(-d_us / params.t1_us).exp_m1();
        // Excess dephasing beyond what T1 already implies.
        let dephasing_rate = (1.0 / params.t2_us - 0.5 / params.t1_us).max(0.0);
        let p2 = -(-d_us * dephasing_rate).exp_m1();
        (p1, p2)
    }

    /// One noise trajectory: apply gates in order, realizing Rzx with its
    /// over-rotated angle and sampling stochastic errors after each pulse
    /// the first time its instruction appears. Returns the final state and
    /// whether the trajectory was free of stochastic errors.
    ///
    /// The RNG is advanced a fixed number of draws per decision point
    /// regardless of outcomes, keeping seeded runs aligned across stretch
    /// assignments.
    fn trajectory(&self, run: &PreparedRun, rng: &mut ChaCha8Rng) -> Result<(StateVector, bool)> {
        let prog = run.prog;
        let mut state = StateVector::zero(prog.circuit.n())?;
        let mut noised = vec![false; prog.schedule.instructions.len()];
        let mut clean = true;
        for (gi, gate) in prog.circuit.gates().iter().enumerate() {
            let applied = run.realized[gi].as_ref().unwrap_or(gate);
            state = crate::quantum::apply_gate(&state, applied, &[])?;
            for &ii in &prog.gate_instructions[gi] {
                if noised[ii] {
                    continue;
                }
                noised[ii] = true;
                let noise = &run.noise[ii];
                if let Some(p_dep) = noise.depolarize {
                    let u: f64 = rng.gen();
                    let which = pick(rng, 15);
                    if u < p_dep {
                        clean = false;
                        let (c, t) = (noise.qubits[0].0, noise.qubits[1].0);
                        let combo = which + 1;
                        state = apply_pauli(&state, c, combo / 4)?;
                        state = apply_pauli(&state, t, combo % 4)?;
                    }
                }
                for &(q, (p1, p2)) in &noise.qubits {
                    let u1: f64 = rng.gen();
                    let which = pick(rng, 3);
                    if u1 < p1 {
                        clean = false;
                        state = apply_pauli(&state, q, which + 1)?;
                    }
                    let u2: f64 = rng.gen();
                    if u2 < p2 {
                        clean = false;
                        state = apply_pauli(&state, q, 3)?;
                    }
                }
            }
        }
        Ok((state, clean))
    }
}

struct PreparedRun<'p> {
    prog: &'p CompiledProgram,
    /// Per gate: the over-rotated replacement to apply, if any.
    realized: Vec<Option<Gate>>,
    noise: Vec<InstructionNoise>,
}

struct InstructionNoise {
    qubits: Vec<(usize, (f64, f64))>,
    depolarize: Option<f64>,
}

/// Uniform choice among `k` options consuming exactly one draw.
fn pick(rng: &mut ChaCha8Rng, k: usize) -> usize {
    ((rng.gen::<f64>() * k as f64) as usize).min(k - 1)
}

/// Standard normal via Box-Muller, consuming exactly two draws.
fn normal_draw(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Apply Pauli `which` (0 = I, 1 = X, 2 = Y, 3 = Z) to qubit `q`.
fn apply_pauli(state: &StateVector, q: usize, which: usize) -> Result<StateVector> {
    use std::f64::consts::PI;
    let gate = match which {
        0 => return Ok(state.clone()),
        1 => Gate::x(q),
        2 => Gate::Sq {
            qubit: q,
            theta: Param::Fixed(PI),
            phi: Param::Fixed(FRAC_PI_2),
            lambda: Param::Fixed(FRAC_PI_2),
        },
        _ => Gate::Rz {
            qubit: q,
            angle: Param::Fixed(PI),
        },
    };
    crate::quantum::apply_gate(state, &gate, &[])
}

/// Outcome of one noisy execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    /// Bitstring (left = highest measured qubit) to shot count; zero-count
    /// outcomes are omitted.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub duration_dt: u64,
    pub duration_us: f64,
    /// Device clock at execution time.
    pub clock_days: f64,
    /// Fraction of trajectories free of stochastic errors — a lower bound
    /// on state fidelity before readout.
    pub fidelity_estimate: f64,
}
