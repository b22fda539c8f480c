use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use super::gate::{Gate, Param};
use super::MAX_QUBITS;
use crate::error::{Error, Result};

/// Dense statevector over `n` qubits, indexed little-endian
/// (qubit 0 is the least significant bit of the amplitude index).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state |0...0>.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "qubit count {n} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Build from raw amplitudes; the length must be a power of two and the
    /// vector normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() || len > (1 << MAX_QUBITS) {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {len} is not a supported power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector has squared norm {norm}, expected 1"
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |amp|^2 per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Apply `gate` in place, resolving free slots against `params`.
    pub(crate) fn apply_resolved_in_place(&mut self, gate: &Gate, params: &[f64]) -> Result<()> {
        gate.validate(self.n)?;
        match gate {
            Gate::Rz { qubit, angle } => {
                let theta = angle.resolve(params)?;
                self.apply_rz(*qubit, theta);
            }
            Gate::Sq {
                qubit,
                theta,
                phi,
                lambda,
            } => {
                let t = theta.resolve(params)?;
                let p = phi.resolve(params)?;
                let l = lambda.resolve(params)?;
                self.apply_sq(*qubit, t, p, l);
            }
            Gate::Rzx {
                control,
                target,
                angle,
            } => {
                let theta = angle.resolve(params)?;
                self.apply_rzx(*control, *target, theta);
            }
            Gate::Cx { control, target } => self.apply_cx(*control, *target),
            Gate::Measure { .. } => {}
        }
        Ok(())
    }

    /// Rz(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
    fn apply_rz(&mut self, qubit: usize, theta: f64) {
        let mask = 1usize << qubit;
        let neg = Complex64::from_polar(1.0, -theta / 2.0);
        let pos = Complex64::from_polar(1.0, theta / 2.0);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if i & mask == 0 { neg } else { pos };
        }
    }

    /// U(theta, phi, lambda) = [[cos(t/2), -e^{il} sin(t/2)],
    ///                          [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]].
    fn apply_sq(&mut self, qubit: usize, theta: f64, phi: f64, lambda: f64) {
        let (sin, cos) = (theta / 2.0).sin_cos();
        let u00 = Complex64::new(cos, 0.0);
        let u01 = -Complex64::from_polar(sin, lambda);
        let u10 = Complex64::from_polar(sin, phi);
        let u11 = Complex64::from_polar(cos, phi + lambda);
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = u00 * a + u01 * b;
                self.amps[j] = u10 * a + u11 * b;
            }
        }
    }

    /// exp(-i (theta/2) Z_c ⊗ X_t): on basis state |x>,
    /// cos(theta/2)|x> - i sin(theta/2) (-1)^{x_c} |x ⊕ e_t>.
    fn apply_rzx(&mut self, control: usize, target: usize, theta: f64) {
        let (sin, cos) = (theta / 2.0).sin_cos();
        let c = Complex64::new(cos, 0.0);
        let ms = Complex64::new(0.0, -sin);
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tmask == 0 {
                let j = i | tmask;
                let a = self.amps[i];
                let b = self.amps[j];
                // Flipping the target leaves the control bit unchanged, so the
                // phase (-1)^{x_c} is shared by both partners of the pair.
                let sign = if i & cmask == 0 { 1.0 } else { -1.0 };
                self.amps[i] = c * a + ms * sign * b;
                self.amps[j] = c * b + ms * sign * a;
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }
}

/// Render basis index `index` as a bitstring with qubit 0 rightmost.
pub fn bitstring(n: usize, index: usize) -> String {
    (0..n)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Draw `shots` samples from the measurement distribution of `state`.
///
/// Sampling is deterministic in `seed`; the result maps bitstrings (qubit 0
/// rightmost) to counts, with zero-count strings omitted.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let probs = state.probabilities();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        // partition_point returns the first index with cumulative > u.
        let idx = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        hist[idx] += 1;
    }
    let mut counts = BTreeMap::new();
    for (idx, &count) in hist.iter().enumerate() {
        if count > 0 {
            counts.insert(bitstring(state.n(), idx), count);
        }
    }
    Ok(counts)
}

/// Helper used by gradient and unitary extraction: run a circuit-shaped gate
/// list from an arbitrary start state.
pub(crate) fn run_gates(
    start: &StateVector,
    gates: &[Gate],
    params: &[f64],
) -> Result<StateVector> {
    let mut state = start.clone();
    for gate in gates {
        state.apply_resolved_in_place(gate, params)?;
    }
    Ok(state)
}

#[allow(dead_code)]
pub(crate) fn fixed(x: f64) -> Param {
    Param::Fixed(x)
}
