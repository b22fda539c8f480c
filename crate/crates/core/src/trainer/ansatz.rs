//! Ansatz builders shared by training, calibration, and the benchmark
//! comparisons: a trainable hardware-friendly circuit and a fixed
//! entangling circuit for duration studies.


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::quantum::{Circuit, Gate, Param};

/// Trainable ansatz: `layers` repetitions of a per-qubit Ry·Rz pair
/// followed by a line of Rzx entanglers, closed by one final Ry·Rz layer.
/// All angles start at small seeded values (a near-identity circuit).
///
/// The Rz gates matter beyond convenience: with Ry alone the generated
/// operator algebra closes on a small subspace and whole energy ranges
/// become unreachable, while full single-qubit control plus one
/// entangling axis generates every unitary on the line. They are also
/// virtual (zero-duration) pulses, so expressiveness costs no schedule
/// time.
pub fn hardware_efficient_ansatz(n: usize, layers: usize, seed: u64) -> Result<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    let mut params = Vec::new();
    let next = |init: f64, params: &mut Vec<f64>| {
        params.push(init);
        Param::Free(params.len() - 1)
    };
    let rotation_layer =
        |gates: &mut Vec<Gate>, params: &mut Vec<f64>, rng: &mut ChaCha8Rng| {
            for q in 0..n {
                let p = next(rng.gen_range(-0.3..0.3), params);
                gates.push(Gate::ry(q, p));
                let p = next(rng.gen_range(-0.3..0.3), params);
                gates.push(Gate::Rz { qubit: q, angle: p });
            }
        };
    for _ in 0..layers {
        rotation_layer(&mut gates, &mut params, &mut rng);
        for q in 0..n - 1 {
            let p = next(rng.gen_range(-0.3..0.3), &mut params);
            gates.push(Gate::Rzx {
                control: q,
                target: q + 1,
                angle: p,
            });
        }
    }
    rotation_layer(&mut gates, &mut params, &mut rng);
    Circuit::new(n, gates, params)
}

/// Fixed-parameter benchmark circuit: `layers` of seeded Rx rotations on
/// every qubit plus seeded arbitrary-angle Rzx entanglers down the line —
/// the usual rotation-plus-controlled-rotation ansatz shape with angles in
/// the range a trained circuit would hold. No free parameters — used for
/// duration and fidelity comparisons, not training.
pub fn entangling_benchmark_circuit(n: usize, layers: usize, seed: u64) -> Result<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..n {
            gates.push(Gate::rx(q, Param::Fixed(rng.gen_range(0.3..2.8))));
        }
        for q in 0..n - 1 {
            gates.push(Gate::Rzx {
                control: q,
                target: q + 1,
                angle: Param::Fixed(rng.gen_range(0.3..2.8)),
            });
        }
    }
    Circuit::new(n, gates, vec![])
}
