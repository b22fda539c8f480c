//! End-to-end verification gates for the whole pipeline.
//!
//! Each test pins one externally checkable contract — closed-form gate
//! semantics, oracle equivalences, recovery of known truth, or a
//! directional claim about calibration on the synthetic device — and
//! prints a single summary line on success.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use qupad_core::calibrator::{calib_loss, calibrate, cma_es_minimize, CalibConfig, CmaConfig};
use qupad_core::compiler::{
    compile, rewrite_cnot_to_rzx, rewrite_rzx_to_cnot, rzx_basis_circuit, rzx_duration_ticks,
    DsrAssignment,
};
use qupad_core::device::DeviceModel;
use qupad_core::lut::{build_lut, fit_error_params, Lut, Measurement};
use qupad_core::pulse::{integrated_area, stretch_pulse, Dsr, GaussianSquarePulse};
use qupad_core::quantum::{
    parameter_shift_gradient, phase_aligned_distance, simulate, unitary_of, Angle, Circuit, Gate,
    Observable, Param, PauliString,
};
use qupad_core::trainer::ansatz::{entangling_benchmark_circuit, hardware_efficient_ansatz};
use qupad_core::trainer::tasks::{exact_ground_energy, tfim_observable};
use qupad_core::trainer::{train, TaskSpec, TrainConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

// ---------------------------------------------------------------- helpers

fn counts_to_probs(counts: &BTreeMap<String, u64>, n: usize, shots: u64) -> Vec<f64> {
    let mut p = vec![0.0; 1 << n];
    for (key, c) in counts {
        let mut idx = 0usize;
        for (j, ch) in key.chars().enumerate() {
            if ch == '1' {
                idx |= 1 << (n - 1 - j);
            }
        }
        p[idx] += *c as f64 / shots as f64;
    }
    p
}

fn tvd(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

/// Z eigenvalues per qubit for one counts key (leftmost char = highest
/// qubit).
fn z_values(key: &str, n: usize) -> Vec<f64> {
    let mut z = vec![1.0; n];
    for (j, ch) in key.chars().enumerate() {
        if ch == '1' {
            z[n - 1 - j] = -1.0;
        }
    }
    z
}

/// Estimate the open-chain transverse-field Ising energy from Z-basis
/// counts plus X-basis counts (taken after a Hadamard on every qubit).
fn tfim_energy_from_counts(
    z_counts: &BTreeMap<String, u64>,
    x_counts: &BTreeMap<String, u64>,
    n: usize,
    shots: u64,
) -> f64 {
    let mut e = 0.0;
    for (key, c) in z_counts {
        let z = z_values(key, n);
        let w = *c as f64 / shots as f64;
        for i in 0..n - 1 {
            e -= w * z[i] * z[i + 1];
        }
    }
    for (key, c) in x_counts {
        let z = z_values(key, n);
        let w = *c as f64 / shots as f64;
        for zi in z {
            e -= w * zi;
        }
    }
    e
}

/// Spearman rank correlation with average ranks on ties.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    };
    let ra = rank(a);
    let rb = rank(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va.sqrt() * vb.sqrt())
}

fn bound_with(circuit: &Circuit, params: &[f64]) -> Circuit {
    Circuit::new(circuit.n(), circuit.gates().to_vec(), params.to_vec())
        .unwrap()
        .bound()
        .unwrap()
}

fn with_measure(c: &Circuit) -> Circuit {
    let mut m = c.clone();
    m.push(Gate::Measure {
        qubits: (0..c.n()).collect(),
    })
    .unwrap();
    m
}

fn with_h_measure(c: &Circuit) -> Circuit {
    let mut m = c.clone();
    for q in 0..c.n() {
        m.push(Gate::h(q)).unwrap();
    }
    m.push(Gate::Measure {
        qubits: (0..c.n()).collect(),
    })
    .unwrap();
    m
}

fn crafted_lut(entries: serde_json::Value) -> Lut {
    let v = json!({
        "device_clock": 0.0,
        "executions": 0,
        "entries": entries,
    });
    Lut::from_json(&v.to_string()).unwrap()
}

fn fit_entry(control: usize, target: usize, k1: f64, k2: f64, b: f64) -> serde_json::Value {
    json!({
        "control": control,
        "target": target,
        "k1": k1,
        "k2": k2,
        "b": b,
        "residual_rms": 0.001,
        "timestamp": 0.0,
        "n1": 9,
        "n2": 7,
        "shots": 1024,
    })
}

// ------------------------------------------------------------------ gates

/// Driving the cross-resonance rotation on |00> leaves the pair in |00>
/// with probability cos^2(theta/2), checked against the closed form on a
/// dense angle grid.
#[test]
fn cross_resonance_rotation_matches_closed_form() {
    let mut worst = 0.0f64;
    for j in 0..=100 {
        let theta = (j as f64 - 50.0) * PI / 50.0;
        let c = Circuit::new(
            2,
            vec![Gate::Rzx {
                control: 0,
                target: 1,
                angle: Param::Fixed(theta),
            }],
            vec![],
        )
        .unwrap();
        let p00 = simulate(&c).unwrap().probabilities()[0];
        let expected = (theta / 2.0).cos().powi(2);
        worst = worst.max((p00 - expected).abs());
    }
    assert!(worst < 1e-12, "worst deviation {worst:.3e}");
    println!("PASS rotation probability: closed-form agreement to {worst:.1e} over 101 angles");
}

/// Shift-rule gradients agree with central finite differences on random
/// parameterized circuits.
#[test]
fn shift_rule_gradients_match_finite_differences() {
    let n = 4;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for trial in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
        let mut gates = Vec::new();
        let mut params = Vec::new();
        while params.len() < 8 {
            if rng.gen_bool(0.3) {
                gates.push(Gate::h(rng.gen_range(0..n)));
            }
            let idx = params.len();
            params.push(rng.gen_range(-2.5..2.5));
            match rng.gen_range(0..3) {
                0 => gates.push(Gate::ry(rng.gen_range(0..n), Param::Free(idx))),
                1 => gates.push(Gate::Rz {
                    qubit: rng.gen_range(0..n),
                    angle: Param::Free(idx),
                }),
                _ => {
                    let c = rng.gen_range(0..n - 1);
                    gates.push(Gate::Rzx {
                        control: c,
                        target: c + 1,
                        angle: Param::Free(idx),
                    });
                }
            }
        }
        let mut terms = Vec::new();
        for _ in 0..3 {
            let word: String = (0..n)
                .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                .collect();
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            terms.push((
                sign * rng.gen_range(0.3..1.3),
                PauliString::parse(&word).unwrap(),
            ));
        }
        let obs = Observable::new(terms).unwrap();
        let circuit = Circuit::new(n, gates.clone(), params.clone()).unwrap();
        let analytic = parameter_shift_gradient(&circuit, &obs).unwrap();

        let value = |p: &[f64]| -> f64 {
            let c = Circuit::new(n, gates.clone(), p.to_vec()).unwrap();
            obs.expectation(&simulate(&c).unwrap()).unwrap()
        };
        for i in 0..params.len() {
            let mut hi = params.clone();
            let mut lo = params.clone();
            hi[i] += h;
            lo[i] -= h;
            let fd = (value(&hi) - value(&lo)) / (2.0 * h);
            let rel = (analytic[i] - fd).abs() / fd.abs().max(1e-3);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-6, "worst relative deviation {worst:.3e}");
    println!("PASS gradients: shift rule vs finite differences, worst relative {worst:.1e}");
}

/// Rewriting CNOTs into native rotations and folding angles into the
/// drivable range both preserve the circuit unitary up to global phase.
#[test]
fn basis_rewrites_preserve_circuit_unitaries() {
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + trial);
        let n = 3 + (trial % 3) as usize;
        let mut gates = Vec::new();
        for _ in 0..10 {
            match rng.gen_range(0..6) {
                0 => gates.push(Gate::h(rng.gen_range(0..n))),
                1 => gates.push(Gate::x(rng.gen_range(0..n))),
                2 => gates.push(Gate::ry(
                    rng.gen_range(0..n),
                    Param::Fixed(rng.gen_range(-PI..PI)),
                )),
                3 => gates.push(Gate::Rz {
                    qubit: rng.gen_range(0..n),
                    angle: Param::Fixed(rng.gen_range(-PI..PI)),
                }),
                4 => {
                    let c = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n);
                    while t == c {
                        t = rng.gen_range(0..n);
                    }
                    gates.push(Gate::Cx { control: c, target: t });
                }
                _ => {
                    let c = rng.gen_range(0..n);
                    let mut t = rng.gen_range(0..n);
                    while t == c {
                        t = rng.gen_range(0..n);
                    }
                    gates.push(Gate::Rzx {
                        control: c,
                        target: t,
                        angle: Param::Fixed(rng.gen_range(-PI..PI)),
                    });
                }
            }
        }
        let c = Circuit::new(n, gates, vec![]).unwrap();
        let reference = unitary_of(&c).unwrap();
        let rewritten = unitary_of(&rewrite_cnot_to_rzx(&c)).unwrap();
        let normalized = unitary_of(&rzx_basis_circuit(&c).unwrap().0).unwrap();
        worst = worst.max(phase_aligned_distance(&reference, &rewritten));
        worst = worst.max(phase_aligned_distance(&reference, &normalized));
    }
    assert!(worst < 1e-10, "worst phase-aligned distance {worst:.3e}");
    println!("PASS basis rewrites: 50 circuits preserved to {worst:.1e}");
}

/// Stretching keeps every pulse's integrated area fixed and lands every
/// duration on the 16-tick grid.
#[test]
fn stretched_pulses_preserve_area_on_the_tick_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sigma = rng.gen_range(8.0..64.0);
        let p = GaussianSquarePulse::new(
            rng.gen_range(0.05..0.5),
            rng.gen_range(-PI..PI),
            sigma,
            rng.gen_range(16.0..800.0),
            sigma * rng.gen_range(2.0..4.0),
        )
        .unwrap();
        let a0 = integrated_area(&p).0;
        for j in 0..10 {
            let dsr = Dsr::new(0.6 + 0.1 * j as f64).unwrap();
            let s = stretch_pulse(&p, dsr).unwrap();
            worst = worst.max((integrated_area(&s).0 - a0).abs() / a0);
            let ticks = s.duration() / 16.0;
            assert!(
                (ticks - ticks.round()).abs() < 1e-9,
                "duration {} off the 16-tick grid",
                s.duration()
            );
        }
    }
    assert!(worst < 1e-6, "worst relative area drift {worst:.3e}");
    println!("PASS pulse stretching: area kept to {worst:.1e} over 1000 stretches");
}

/// Tone duration is even in the angle, peaks at half-turn magnitude, and
/// bottoms out at zero and full-turn magnitudes.
#[test]
fn tone_duration_curve_is_a_symmetric_tent() {
    let dev = DeviceModel::noiseless(2);
    let d = |k: i64| {
        rzx_duration_ticks(Angle::new(k as f64 * PI / 50.0), (0, 1), Dsr::ONE, &dev).unwrap()
    };
    for k in 0..=50i64 {
        assert_eq!(d(k), d(-k), "asymmetry at step {k}");
    }
    let ds: Vec<u64> = (0..=50).map(d).collect();
    let dmax = *ds.iter().max().unwrap();
    let peak: Vec<usize> = (0..=50).filter(|&k| ds[k] == dmax).collect();
    assert!(
        peak.contains(&25) && peak.iter().all(|&k| (24..=26).contains(&k)),
        "peak steps {peak:?} not at the half turn"
    );
    for k in 0..25 {
        assert!(ds[k] <= ds[k + 1], "rise violated at step {k}");
    }
    for k in 25..50 {
        assert!(ds[k] >= ds[k + 1], "fall violated at step {k}");
    }
    assert_eq!(ds[0], *ds.iter().min().unwrap(), "zero angle is the floor");
    assert_eq!(
        ds[50],
        *ds[25..].iter().min().unwrap(),
        "full turn is the outer floor"
    );
    println!(
        "PASS duration tent: symmetric, peak {dmax} at the half turn, floors {} and {}",
        ds[0], ds[50]
    );
}

/// Compiling the rotation-plus-entangler ansatz through native scaled
/// tones runs 2-4x shorter than the CNOT-basis compilation.
#[test]
fn native_tone_basis_beats_cnot_basis_duration() {
    let dev = DeviceModel::noiseless(5);
    for seed in [1u64, 2, 3] {
        let c = entangling_benchmark_circuit(5, 2, seed).unwrap();
        let dsr = DsrAssignment::uniform(c.two_qubit_pairs(), Dsr::ONE);
        let native = compile(&c, &dsr, &dev).unwrap().total_duration();
        let cnot = compile(&rewrite_rzx_to_cnot(&c), &dsr, &dev)
            .unwrap()
            .total_duration();
        let ratio = cnot as f64 / native as f64;
        assert!(
            (2.0..=4.0).contains(&ratio),
            "seed {seed}: ratio {ratio:.3} outside [2, 4] ({cnot} vs {native})"
        );
        println!("PASS basis duration ratio: seed {seed} -> {cnot} / {native} = {ratio:.2}x");
    }
}

/// Adding the duration-aware penalty to variational training shortens the
/// compiled schedule without giving up ground-state accuracy.
#[test]
fn duration_weighted_training_shortens_schedules_at_equal_energy() {
    let ansatz = hardware_efficient_ansatz(4, 2, 11).unwrap();
    let obs = tfim_observable(4).unwrap();
    let exact = exact_ground_energy(&obs).unwrap();
    let task = TaskSpec::Vqe {
        observable: obs,
    };
    let run = |beta: f64| {
        let cfg = TrainConfig {
            beta,
            iterations: 800,
            seed: 11,
            ..TrainConfig::default()
        };
        train(&ansatz, &task, &cfg).unwrap()
    };
    let plain = run(0.0);
    let aware = run(0.005);
    for (label, r) in [("plain", &plain), ("aware", &aware)] {
        assert!(
            (r.final_task_loss - exact).abs() < 1e-2,
            "{label} energy {} vs exact {exact}",
            r.final_task_loss
        );
    }
    assert!(
        aware.duration_dt < plain.duration_dt,
        "no shortening: {} vs {}",
        aware.duration_dt,
        plain.duration_dt
    );
    let rel = (aware.final_task_loss - plain.final_task_loss).abs() / plain.final_task_loss.abs();
    assert!(rel < 0.05, "energy moved by {rel:.4} relative");
    println!(
        "PASS duration-aware training: {} -> {} ticks, energies {:.6} / {:.6} vs exact {exact:.6}",
        plain.duration_dt, aware.duration_dt, plain.final_task_loss, aware.final_task_loss
    );
}

/// The error-model fit recovers known parameters: exactly on clean data,
/// and within stated tolerances under shot noise on the device.
#[test]
fn error_table_fits_recover_known_truth() {
    let (k1, k2, b) = (0.95, 0.08, 0.03);

    // Clean closed-form data: recovery to numerical precision.
    let closed_form = |t: f64, d: f64| -> f64 {
        let s = t - FRAC_PI_2;
        let sign = if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
        let eps = (k2 * (d - 1.0) + b) * sign;
        (t.cos() - k1 * t.sin() * eps.sin() + 1.0) / 2.0
    };
    let mut ms = Vec::new();
    for &t in &qupad_core::lut::theta_grid(9).unwrap() {
        for &dsr in &qupad_core::lut::dsr_grid(5).unwrap() {
            ms.push(Measurement {
                theta: Angle::new(t),
                dsr,
                p00: closed_form(t, dsr.value()),
                shots: 8192,
            });
        }
    }
    let fit = fit_error_params(&ms, (0, 1)).unwrap();
    assert!((fit.k1 - k1).abs() < 1e-6, "k1 {}", fit.k1);
    assert!((fit.k2 - k2).abs() < 1e-6, "k2 {}", fit.k2);
    assert!((fit.b - b).abs() < 1e-6, "b {}", fit.b);

    // Same grid under binomial shot noise at the stated shot budget.
    let mut passes = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let noisy: Vec<Measurement> = ms
            .iter()
            .map(|m| {
                let hits = (0..m.shots).filter(|_| rng.gen_bool(m.p00)).count();
                Measurement {
                    p00: hits as f64 / m.shots as f64,
                    ..*m
                }
            })
            .collect();
        let f = fit_error_params(&noisy, (0, 1)).unwrap();
        let ok = (f.k1 - k1).abs() / k1 < 0.10
            && (f.k2 - k2).abs() / k2 < 0.15
            && (f.b - b).abs() / b < 0.15;
        if ok {
            passes += 1;
        }
    }
    assert!(passes >= 8, "only {passes}/10 seeds recovered the truth");
    println!("PASS table fits: clean data exact to 1e-6, noisy recovery {passes}/10 seeds");
}

/// Building a table costs exactly one benchmark execution per pair and
/// grid point.
#[test]
fn table_construction_cost_is_the_grid_product() {
    let dev = DeviceModel::noiseless(8);
    let pairs = dev.coupling_pairs();
    assert_eq!(pairs.len(), 7);
    let lut = build_lut(&dev, &pairs, 9, 5, 256, 5).unwrap();
    assert_eq!(lut.executions(), 7 * 9 * 5);
    println!("PASS table cost: 7 pairs x 9 angles x 5 stretches = {} runs", lut.executions());
}

/// The stretch search drives a standard quadratic to its optimum, its
/// best-so-far record never regresses, and on a two-pair problem it lands
/// where an exhaustive grid says the optimum is.
#[test]
fn stretch_search_matches_reference_optima() {
    // Quadratic bowl in five dimensions.
    let cfg = CmaConfig {
        population: qupad_core::calibrator::default_population(5),
        generations: 200,
        sigma0: 0.3,
        seed: 42,
        bounds: (-5.0, 5.0),
    };
    let out = cma_es_minimize(
        |x| Ok(x.iter().map(|v| v * v).sum()),
        &[0.3, -0.4, 0.25, 0.5, -0.2],
        &cfg,
    )
    .unwrap();
    assert!(out.best_loss < 1e-6, "sphere loss {:.3e}", out.best_loss);
    for w in out.trace.windows(2) {
        assert!(
            w[1].best_so_far <= w[0].best_so_far,
            "best-so-far regressed between generations {} and {}",
            w[0].generation,
            w[1].generation
        );
    }

    // Two coupled pairs with distinct zero-error stretches; heavy error
    // weight makes those the optimum, and a 0.01-step exhaustive grid is
    // the oracle.
    let dev = DeviceModel::noiseless(3);
    let c = Circuit::new(
        3,
        vec![
            Gate::Rzx {
                control: 0,
                target: 1,
                angle: Param::Fixed(0.9),
            },
            Gate::Rzx {
                control: 1,
                target: 2,
                angle: Param::Fixed(0.9),
            },
        ],
        vec![],
    )
    .unwrap();
    let lut = crafted_lut(json!([
        fit_entry(0, 1, 1.0, 0.1, 0.02),
        fit_entry(1, 2, 1.0, 0.2, 0.02),
    ]));
    let alpha = 50.0;
    let pairs = c.two_qubit_pairs();
    let mut best = (f64::INFINITY, (0.0, 0.0));
    for i in 0..=90 {
        for j in 0..=90 {
            let (x, y) = (0.6 + 0.01 * i as f64, 0.6 + 0.01 * j as f64);
            let mut assign = DsrAssignment::uniform(pairs.iter().copied(), Dsr::ONE);
            assign.insert((0, 1), Dsr::new(x.min(1.5)).unwrap());
            assign.insert((1, 2), Dsr::new(y.min(1.5)).unwrap());
            let loss = calib_loss(&c, &assign, &lut, &dev, alpha).unwrap();
            if loss < best.0 {
                best = (loss, (x, y));
            }
        }
    }
    let cal = calibrate(
        &c,
        &lut,
        &dev,
        &CalibConfig {
            alpha,
            generations: 60,
            population: Some(10),
            seed: 13,
            ..CalibConfig::default()
        },
    )
    .unwrap();
    let fx = cal.assignment.get((0, 1)).unwrap().value();
    let fy = cal.assignment.get((1, 2)).unwrap().value();
    assert!(
        (fx - best.1 .0).abs() <= 0.02 && (fy - best.1 .1).abs() <= 0.02,
        "search ({fx:.3}, {fy:.3}) vs grid {:?}",
        best.1
    );
    println!(
        "PASS stretch search: sphere {:.1e}, grid oracle ({:.2}, {:.2}) matched at ({fx:.3}, {fy:.3})",
        out.best_loss, best.1 .0, best.1 .1
    );
}

/// Lower calibration loss predicts higher executed fidelity: rank
/// correlation across random stretch assignments on a noisy device.
#[test]
fn calibration_objective_tracks_executed_fidelity() {
    let dev = DeviceModel::new_seeded(4, 909).unwrap().drift(30.0).unwrap();
    let core = entangling_benchmark_circuit(4, 2, 5).unwrap();
    let meas = with_measure(&core);
    let pairs = core.two_qubit_pairs();
    let lut = build_lut(&dev, &pairs, 9, 5, 4096, 33).unwrap();
    let ideal = simulate(&core).unwrap().probabilities();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut inv_losses = Vec::new();
    let mut fids = Vec::new();
    for k in 0..30 {
        let mut assign = DsrAssignment::uniform(pairs.iter().copied(), Dsr::ONE);
        for &p in &pairs {
            assign.insert(p, Dsr::new(rng.gen_range(Dsr::MIN..Dsr::MAX)).unwrap());
        }
        let loss = calib_loss(&core, &assign, &lut, &dev, 10.0).unwrap();
        let prog = compile(&meas, &assign, &dev).unwrap();
        let run = dev.execute(&prog, 32768, 5000 + k).unwrap();
        let q = counts_to_probs(&run.counts, 4, run.shots);
        inv_losses.push(1.0 / loss);
        fids.push(1.0 - tvd(&ideal, &q));
    }
    let rho = spearman(&inv_losses, &fids);
    assert!(rho >= 0.6, "rank correlation {rho:.3} below 0.6");
    println!("PASS loss-fidelity alignment: Spearman rho = {rho:.3} over 30 assignments");
}

/// On drifted devices, searched stretch assignments beat the unit default
/// in executed output fidelity and in variational energy error.
#[test]
fn calibrated_stretches_beat_unit_stretch_in_execution() {
    let ansatz = hardware_efficient_ansatz(4, 2, 11).unwrap();
    let obs = tfim_observable(4).unwrap();
    let e_exact = exact_ground_energy(&obs).unwrap();
    let task = TaskSpec::Vqe { observable: obs };
    let cfg = TrainConfig {
        beta: 0.005,
        iterations: 800,
        seed: 11,
        ..TrainConfig::default()
    };
    let trained = train(&ansatz, &task, &cfg).unwrap();
    assert!((trained.final_task_loss - e_exact).abs() < 1e-2);
    let core = bound_with(&ansatz, &trained.params);
    let meas = with_measure(&core);
    let xmeas = with_h_measure(&core);
    let pairs = core.two_qubit_pairs();
    let ideal = simulate(&core).unwrap().probabilities();

    let shots = 16384u64;
    let mut fid_wins = 0;
    let mut e_wins = 0;
    for s in 0..10u64 {
        let dev = DeviceModel::new_seeded(4, 1000 + s)
            .unwrap()
            .drift(45.0)
            .unwrap();
        let lut = build_lut(&dev, &pairs, 9, 5, 8192, s).unwrap();
        let ccfg = CalibConfig {
            alpha: 5.0,
            seed: s,
            ..CalibConfig::default()
        };
        let calib = calibrate(&core, &lut, &dev, &ccfg).unwrap();
        let unit = DsrAssignment::uniform(pairs.iter().copied(), Dsr::ONE);

        let mut fid = [0.0; 2];
        let mut egap = [0.0; 2];
        for (i, assign) in [&calib.assignment, &unit].into_iter().enumerate() {
            let run = dev
                .execute(&compile(&meas, assign, &dev).unwrap(), shots, 9000 + s)
                .unwrap();
            fid[i] = 1.0 - tvd(&ideal, &counts_to_probs(&run.counts, 4, run.shots));
            let runx = dev
                .execute(&compile(&xmeas, assign, &dev).unwrap(), shots, 9500 + s)
                .unwrap();
            let e = tfim_energy_from_counts(&run.counts, &runx.counts, 4, shots);
            egap[i] = (e - e_exact).abs();
        }
        if fid[0] > fid[1] {
            fid_wins += 1;
        }
        if egap[0] < egap[1] {
            e_wins += 1;
        }
    }
    assert!(fid_wins >= 8, "fidelity wins {fid_wins}/10 below 8");
    assert!(e_wins >= 7, "energy wins {e_wins}/10 below 7");
    println!(
        "PASS calibration benefit: fidelity wins {fid_wins}/10, energy wins {e_wins}/10"
    );
}

/// Rebuilding the table after the noise drifts moves the searched optimum
/// by a measurable amount.
#[test]
fn drifted_devices_move_the_calibrated_optimum() {
    let core = entangling_benchmark_circuit(4, 2, 5).unwrap();
    let pairs = core.two_qubit_pairs();
    let mut moved = 0;
    for s in 0..10u64 {
        let dev0 = DeviceModel::new_seeded(4, 2000 + s).unwrap();
        let dev1 = dev0.drift(60.0).unwrap();
        let mut found = Vec::new();
        for dev in [&dev0, &dev1] {
            let lut = build_lut(dev, &pairs, 9, 5, 4096, s).unwrap();
            let ccfg = CalibConfig {
                seed: s,
                ..CalibConfig::default()
            };
            let calib = calibrate(&core, &lut, dev, &ccfg).unwrap();
            found.push(
                pairs
                    .iter()
                    .map(|&p| calib.assignment.get(p).unwrap().value())
                    .collect::<Vec<f64>>(),
            );
        }
        let max_shift = (0..pairs.len())
            .map(|i| (found[0][i] - found[1][i]).abs())
            .fold(0.0, f64::max);
        if max_shift > 0.02 {
            moved += 1;
        }
    }
    assert!(moved >= 7, "optimum moved in only {moved}/10 seeds");
    println!("PASS drift sensitivity: optimum moved > 0.02 in {moved}/10 seeds");
}
