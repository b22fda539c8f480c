use std::f64::consts::FRAC_PI_2;

use super::circuit::Circuit;
use super::gate::Param;
use super::observable::Observable;
use super::simulate;
use crate::error::Result;

/// Exact gradient of `<obs>` with respect to the circuit's parameter vector
/// via the parameter-shift rule.
///
/// Every parameterized gate in the set (Rz, SQ angles, Rzx) has a generator
/// with eigenvalues +-1/2, so for each *occurrence* o of parameter p,
///
/// ```text
/// d<obs>/dp |_o = ( f(o + pi/2) - f(o - pi/2) ) / 2
/// ```
///
/// and occurrences sum when a parameter is shared between slots. Shifts are
/// applied to one slot at a time, which keeps the rule exact for shared
/// parameters. Returns one entry per circuit parameter; parameters bound to
/// no gate get gradient zero, and a parameterless circuit yields an empty
/// vector.
pub fn parameter_shift_gradient(circuit: &Circuit, obs: &Observable) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; circuit.params().len()];
    for (p, slot) in grad.iter_mut().enumerate() {
        for (gate_idx, slot_idx) in circuit.slots_for_param(p) {
            let plus = eval_with_slot_offset(circuit, obs, gate_idx, slot_idx, FRAC_PI_2)?;
            let minus = eval_with_slot_offset(circuit, obs, gate_idx, slot_idx, -FRAC_PI_2)?;
            *slot += (plus - minus) / 2.0;
        }
    }
    Ok(grad)
}

/// Evaluate `<obs>` with a single angle slot offset by `delta`.
fn eval_with_slot_offset(
    circuit: &Circuit,
    obs: &Observable,
    gate_idx: usize,
    slot_idx: usize,
    delta: f64,
) -> Result<f64> {
    let mut gates = circuit.gates().to_vec();
    let gate = &gates[gate_idx];
    let base = gate.params()[slot_idx].resolve(circuit.params())?;
    gates[gate_idx] = gate.with_param(slot_idx, Param::Fixed(base + delta));
    let shifted = Circuit::new(circuit.n(), gates, circuit.params().to_vec())?;
    obs.expectation(&simulate(&shifted)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::gate::Gate;
    use crate::quantum::observable::PauliString;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Central finite differences on the full parameter vector — the
    /// independent oracle the shift rule is checked against.
    fn finite_difference(circuit: &Circuit, obs: &Observable, h: f64) -> Vec<f64> {
        let base = circuit.params().to_vec();
        let mut grad = vec![0.0; base.len()];
        for p in 0..base.len() {
            let mut up = circuit.clone();
            let mut params = base.clone();
            params[p] += h;
            up.set_params(params).unwrap();
            let mut down = circuit.clone();
            let mut params = base.clone();
            params[p] -= h;
            down.set_params(params).unwrap();
            let f_up = obs.expectation(&simulate(&up).unwrap()).unwrap();
            let f_down = obs.expectation(&simulate(&down).unwrap()).unwrap();
            grad[p] = (f_up - f_down) / (2.0 * h);
        }
        grad
    }

    #[test]
    fn rz_on_plus_state_has_minus_sin_gradient() {
        // <X> after Rz(theta) on |+> equals cos(theta); d/dtheta = -sin(theta).
        for &theta in &[0.0, 0.3, 1.2, -2.5] {
            let mut c = Circuit::new(1, vec![], vec![theta]).unwrap();
            c.push(Gate::h(0)).unwrap();
            c.push(Gate::Rz {
                qubit: 0,
                angle: Param::Free(0),
            })
            .unwrap();
            let obs =
                Observable::new(vec![(1.0, PauliString::parse("X").unwrap())]).unwrap();
            let grad = parameter_shift_gradient(&c, &obs).unwrap();
            assert!(
                (grad[0] + theta.sin()).abs() < 1e-12,
                "theta = {theta}, grad = {}",
                grad[0]
            );
        }
    }

    #[test]
    fn no_free_parameters_gives_empty_gradient() {
        let mut c = Circuit::new(2, vec![], vec![]).unwrap();
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::Cx {
            control: 0,
            target: 1,
        })
        .unwrap();
        let obs = Observable::single_z(2, 1).unwrap();
        assert!(parameter_shift_gradient(&c, &obs).unwrap().is_empty());
    }

    #[test]
    fn shared_parameter_sums_occurrences() {
        // Same parameter driving two Rz gates on the same wire behaves like
        // Rz(2 theta): <X> = cos(2 theta), gradient -2 sin(2 theta).
        let theta = 0.47;
        let mut c = Circuit::new(1, vec![], vec![theta]).unwrap();
        c.push(Gate::h(0)).unwrap();
        c.push(Gate::Rz {
            qubit: 0,
            angle: Param::Free(0),
        })
        .unwrap();
        c.push(Gate::Rz {
            qubit: 0,
            angle: Param::Free(0),
        })
        .unwrap();
        let obs = Observable::new(vec![(1.0, PauliString::parse("X").unwrap())]).unwrap();
        let grad = parameter_shift_gradient(&c, &obs).unwrap();
        assert!((grad[0] + 2.0 * (2.0 * theta).sin()).abs() < 1e-12);
    }

    #[test]
    fn random_circuits_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..10 {
            let n = 4;
            let n_params = 8;
            let params: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut c = Circuit::new(n, vec![], params).unwrap();
            for p in 0..n_params {
                let q = rng.gen_range(0..n);
                match rng.gen_range(0..3) {
                    0 => c
                        .push(Gate::Rz {
                            qubit: q,
                            angle: Param::Free(p),
                        })
                        .unwrap(),
                    1 => c.push(Gate::rx(q, Param::Free(p))).unwrap(),
                    _ => {
                        let mut t = rng.gen_range(0..n);
                        while t == q {
                            t = rng.gen_range(0..n);
                        }
                        c.push(Gate::Rzx {
                            control: q,
                            target: t,
                            angle: Param::Free(p),
                        })
                        .unwrap();
                    }
                }
                if rng.gen_bool(0.3) {
                    c.push(Gate::h(rng.gen_range(0..n))).unwrap();
                }
            }
            let obs = Observable::new(vec![
                (0.8, PauliString::parse("ZZII").unwrap()),
                (-0.5, PauliString::parse("IXYI").unwrap()),
                (0.3, PauliString::parse("IIZX").unwrap()),
            ])
            .unwrap();
            let shift = parameter_shift_gradient(&c, &obs).unwrap();
            let fd = finite_difference(&c, &obs, 1e-5);
            // Central differences carry ~1e-10 roundoff, so the comparison
            // scale never drops below 1: tiny gradients are checked
            // absolutely, large ones relatively.
            let scale = fd.iter().map(|g| g.abs()).fold(1.0_f64, f64::max);
            for (p, (a, b)) in shift.iter().zip(&fd).enumerate() {
                assert!(
                    (a - b).abs() / scale < 1e-6,
                    "trial {trial} param {p}: shift {a} vs fd {b}"
                );
            }
        }
    }
}
