//! Training objectives: energy expectation for eigensolver runs and
//! cross-entropy over readout-derived class scores for classification, plus
//! the reference problems used throughout the tests (transverse-field Ising
//! chain, synthetic separable dataset) and a dense exact-diagonalization
//! oracle.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    parameter_shift_gradient, simulate, Circuit, Gate, Observable, Param, Pauli, PauliString,
};

/// One labelled feature vector; features are angles fed to the encoding
/// rotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

/// What the circuit is being trained for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TaskSpec {
    /// Minimize the expectation of an observable.
    Vqe { observable: Observable },
    /// Minimize cross-entropy of class scores built from per-qubit Z
    /// expectations through a fixed linear readout (rows = classes).
    Classify {
        samples: Vec<Sample>,
        readout: Vec<Vec<f64>>,
    },
}

impl TaskSpec {
    /// Check the task against the ansatz it will train.
    pub fn validate(&self, circuit: &Circuit) -> Result<()> {
        match self {
            TaskSpec::Vqe { observable } => {
                if observable.n() != circuit.n() {
                    return Err(Error::InvalidArgument(format!(
                        "observable acts on {} qubits, circuit has {}",
                        observable.n(),
                        circuit.n()
                    )));
                }
            }
            TaskSpec::Classify { samples, readout } => {
                if samples.is_empty() || readout.is_empty() {
                    return Err(Error::InvalidArgument(
                        "classification needs samples and readout rows".into(),
                    ));
                }
                for row in readout {
                    if row.len() != circuit.n() {
                        return Err(Error::InvalidArgument(format!(
                            "readout row has {} weights, circuit has {} qubits",
                            row.len(),
                            circuit.n()
                        )));
                    }
                }
                for s in samples {
                    if s.features.len() != circuit.n() {
                        return Err(Error::InvalidArgument(format!(
                            "sample has {} features, encoding uses {} qubits",
                            s.features.len(),
                            circuit.n()
                        )));
                    }
                    if s.label >= readout.len() {
                        return Err(Error::InvalidArgument(format!(
                            "label {} outside {} classes",
                            s.label,
                            readout.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Task loss at the circuit's current parameters.
    pub fn loss(&self, circuit: &Circuit) -> Result<f64> {
        match self {
            TaskSpec::Vqe { observable } => observable.expectation(&simulate(circuit)?),
            TaskSpec::Classify { samples, readout } => {
                let mut total = 0.0;
                for sample in samples {
                    let embedded = embed_features(circuit, &sample.features)?;
                    let z = qubit_z_values(&embedded)?;
                    let probs = class_probabilities(readout, &z);
                    total -= probs[sample.label].max(1e-300).ln();
                }
                Ok(total / samples.len() as f64)
            }
        }
    }

    /// Exact gradient of the task loss with respect to the circuit's free
    /// parameters (parameter-shift evaluations on the statevector).
    pub fn gradient(&self, circuit: &Circuit) -> Result<Vec<f64>> {
        match self {
            TaskSpec::Vqe { observable } => parameter_shift_gradient(circuit, observable),
            TaskSpec::Classify { samples, readout } => {
                let n = circuit.n();
                let mut grad = vec![0.0; circuit.params().len()];
                for sample in samples {
                    let embedded = embed_features(circuit, &sample.features)?;
                    let z = qubit_z_values(&embedded)?;
                    let probs = class_probabilities(readout, &z);
                    // d(cross-entropy)/d(z_q) through the softmax scores.
                    let mut dz = vec![0.0; n];
                    for (c, row) in readout.iter().enumerate() {
                        let coef = probs[c] - if c == sample.label { 1.0 } else { 0.0 };
                        for (q, w) in row.iter().enumerate() {
                            dz[q] += coef * w;
                        }
                    }
                    for (q, dzq) in dz.iter().enumerate() {
                        if dzq.abs() < 1e-300 {
                            continue;
                        }
                        let gq = parameter_shift_gradient(
                            &embedded,
                            &Observable::single_z(n, q)?,
                        )?;
                        for (gi, gv) in grad.iter_mut().zip(&gq) {
                            *gi += dzq * gv;
                        }
                    }
                }
                let scale = 1.0 / samples.len() as f64;
                for g in &mut grad {
                    *g *= scale;
                }
                Ok(grad)
            }
        }
    }

    /// Fraction of samples whose top class score matches the label
    /// (classification only).
    pub fn accuracy(&self, circuit: &Circuit) -> Result<f64> {
        match self {
            TaskSpec::Vqe { .. } => Err(Error::InvalidArgument(
                "accuracy is only defined for classification".into(),
            )),
            TaskSpec::Classify { samples, readout } => {
                let mut hits = 0usize;
                for sample in samples {
                    let embedded = embed_features(circuit, &sample.features)?;
                    let z = qubit_z_values(&embedded)?;
                    let probs = class_probabilities(readout, &z);
                    let top = probs
                        .iter()
                        .enumerate()
                        .max_by(|a, b| f64::total_cmp(a.1, b.1))
                        .map(|(c, _)| c)
                        .unwrap_or(0);
                    if top == sample.label {
                        hits += 1;
                    }
                }
                Ok(hits as f64 / samples.len() as f64)
            }
        }
    }
}

/// Prefix the ansatz with angle-encoding X rotations, one feature per qubit.
fn embed_features(circuit: &Circuit, features: &[f64]) -> Result<Circuit> {
    let mut gates: Vec<Gate> = features
        .iter()
        .enumerate()
        .map(|(q, &x)| Gate::rx(q, Param::Fixed(x)))
        .collect();
    gates.extend(circuit.gates().iter().cloned());
    Circuit::new(circuit.n(), gates, circuit.params().to_vec())
}

fn qubit_z_values(circuit: &Circuit) -> Result<Vec<f64>> {
    let state = simulate(circuit)?;
    (0..circuit.n())
        .map(|q| Observable::single_z(circuit.n(), q)?.expectation(&state))
        .collect()
}

fn class_probabilities(readout: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    let scores: Vec<f64> = readout
        .iter()
        .map(|row| row.iter().zip(z).map(|(w, zv)| w * zv).sum())
        .collect();
    let peak = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = scores.iter().map(|s| (s - peak).exp()).collect();
    let norm: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / norm).collect()
}

/// Open-chain transverse-field Ising Hamiltonian,
/// `-sum Z_i Z_{i+1} - sum X_i`.
pub fn tfim_observable(n: usize) -> Result<Observable> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "the Ising chain needs at least 2 sites".into(),
        ));
    }
    let mut terms = Vec::new();
    for i in 0..n - 1 {
        let mut ops = vec![Pauli::I; n];
        ops[i] = Pauli::Z;
        ops[i + 1] = Pauli::Z;
        terms.push((-1.0, PauliString::new(ops)?));
    }
    for i in 0..n {
        let mut ops = vec![Pauli::I; n];
        ops[i] = Pauli::X;
        terms.push((-1.0, PauliString::new(ops)?));
    }
    Observable::new(terms)
}

/// Smallest eigenvalue of the observable by dense diagonalization.
/// Independent of the simulator: builds the matrix straight from the Pauli
/// words. Capped at 10 qubits.
pub fn exact_ground_energy(obs: &Observable) -> Result<f64> {
    let n = obs.n();
    if n > 10 {
        return Err(Error::Capacity(format!(
            "dense diagonalization capped at 10 qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut re = vec![0.0f64; dim * dim];
    let mut im = vec![0.0f64; dim * dim];
    for (coeff, word) in obs.terms() {
        for col in 0..dim {
            let mut row = col;
            let (mut ar, mut ai) = (*coeff, 0.0f64);
            for q in 0..n {
                let mask = 1usize << q;
                let bit = (col >> q) & 1;
                match word.op(q) {
                    Pauli::I => {}
                    Pauli::X => row ^= mask,
                    Pauli::Z => {
                        if bit == 1 {
                            ar = -ar;
                            ai = -ai;
                        }
                    }
                    Pauli::Y => {
                        // |0> -> i|1>, |1> -> -i|0>
                        row ^= mask;
                        let s = if bit == 0 { 1.0 } else { -1.0 };
                        (ar, ai) = (-s * ai, s * ar);
                    }
                }
            }
            re[row * dim + col] += ar;
            im[row * dim + col] += ai;
        }
    }

    let eigenvalues = if im.iter().all(|v| v.abs() < 1e-12) {
        let m = DMatrix::from_fn(dim, dim, |r, c| re[r * dim + c]);
        m.symmetric_eigen().eigenvalues
    } else {
        // Hermitian A + iB has the same spectrum (doubled) as the real
        // symmetric block matrix [[A, -B], [B, A]].
        let m = DMatrix::from_fn(2 * dim, 2 * dim, |r, c| {
            let (rb, rq) = (r / dim, r % dim);
            let (cb, cq) = (c / dim, c % dim);
            match (rb, cb) {
                (0, 0) | (1, 1) => re[rq * dim + cq],
                (0, 1) => -im[rq * dim + cq],
                _ => im[rq * dim + cq],
            }
        });
        m.symmetric_eigen().eigenvalues
    };
    Ok(eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
}

/// Fixed 3-class readout over 4 qubits: rows are mutually orthogonal sign
/// patterns, so each class has a dedicated direction in Z-expectation space.
pub fn synthetic_readout() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 1.0, -1.0, -1.0],
        vec![-1.0, 1.0, 1.0, -1.0],
        vec![1.0, -1.0, 1.0, -1.0],
    ]
}

/// Seeded 3-class, 4-feature dataset: Gaussian blobs around angle centers
/// whose encoded Z-expectation patterns line up with the readout rows, so
/// the task is cleanly separable at desk scale.
pub fn synthetic_classification_task(per_class: usize, seed: u64) -> Result<TaskSpec> {
    if per_class == 0 {
        return Err(Error::InvalidArgument(
            "need at least one sample per class".into(),
        ));
    }
    let centers: [[f64; 4]; 3] = [
        [0.80, 0.80, 2.35, 2.35],
        [2.35, 0.80, 0.80, 2.35],
        [0.80, 2.35, 0.80, 2.35],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scatter = Normal::new(0.0, 0.25).expect("valid scatter");
    let mut samples = Vec::with_capacity(3 * per_class);
    for _ in 0..per_class {
        for (label, center) in centers.iter().enumerate() {
            let features = center
                .iter()
                .map(|&c| (c + scatter.sample(&mut rng)).clamp(0.05, 3.09))
                .collect();
            samples.push(Sample { features, label });
        }
    }
    Ok(TaskSpec::Classify {
        samples,
        readout: synthetic_readout(),
    })
}

/// Seeded feature vector for spot checks.
pub fn random_features(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.1..3.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_circuit(n: usize) -> Circuit {
        Circuit::new(n, vec![], vec![]).unwrap()
    }

    #[test]
    fn ising_chain_has_bond_and_field_terms() {
        let obs = tfim_observable(3).unwrap();
        assert_eq!(obs.terms().len(), 5, "2 bonds + 3 fields");
        // On |000>: every ZZ bond contributes -1, every X field 0.
        let state = simulate(&identity_circuit(3)).unwrap();
        let e = obs.expectation(&state).unwrap();
        assert!((e + 2.0).abs() < 1e-12);
        assert!(tfim_observable(1).is_err());
    }

    #[test]
    fn dense_diagonalization_rejects_large_systems() {
        let word = PauliString::new(vec![Pauli::I; 11]).unwrap();
        let obs = Observable::new(vec![(1.0, word)]).unwrap();
        assert!(matches!(
            exact_ground_energy(&obs),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn angle_encoding_maps_features_to_cosines() {
        let features = [0.4, 1.1, 2.0, 2.9];
        let embedded = embed_features(&identity_circuit(4), &features).unwrap();
        let z = qubit_z_values(&embedded).unwrap();
        for (q, (&x, zq)) in features.iter().zip(&z).enumerate() {
            assert!((zq - x.cos()).abs() < 1e-12, "qubit {q}: {zq} vs cos {x}");
        }
    }

    #[test]
    fn classification_loss_matches_hand_softmax() {
        let features = vec![0.4, 1.1, 2.0, 2.9];
        let readout = synthetic_readout();
        let task = TaskSpec::Classify {
            samples: vec![Sample {
                features: features.clone(),
                label: 1,
            }],
            readout: readout.clone(),
        };
        // Independent recomputation from the encoding identity <Z> = cos x.
        let z: Vec<f64> = features.iter().map(|x| x.cos()).collect();
        let scores: Vec<f64> = readout
            .iter()
            .map(|row| row.iter().zip(&z).map(|(w, zv)| w * zv).sum())
            .collect();
        let norm: f64 = scores.iter().map(|s| s.exp()).sum();
        let expected = -(scores[1].exp() / norm).ln();

        let loss = task.loss(&identity_circuit(4)).unwrap();
        assert!((loss - expected).abs() < 1e-12, "{loss} vs {expected}");
    }

    #[test]
    fn synthetic_dataset_is_balanced_bounded_and_seeded() {
        let t1 = synthetic_classification_task(5, 3).unwrap();
        let t2 = synthetic_classification_task(5, 3).unwrap();
        let t3 = synthetic_classification_task(5, 4).unwrap();
        assert_eq!(t1, t2, "same seed reproduces the dataset");
        assert_ne!(t1, t3, "different seed moves the samples");
        let TaskSpec::Classify { samples, .. } = t1 else {
            panic!("expected a classification task");
        };
        assert_eq!(samples.len(), 15);
        for label in 0..3 {
            assert_eq!(samples.iter().filter(|s| s.label == label).count(), 5);
        }
        for s in &samples {
            assert_eq!(s.features.len(), 4);
            for &f in &s.features {
                assert!((0.05..=3.09).contains(&f));
            }
        }
        assert!(synthetic_classification_task(0, 1).is_err());
    }

    #[test]
    fn raw_encoding_already_separates_the_synthetic_classes() {
        // The class centers were placed so their cosine signatures align
        // with the readout rows; even the bare encoding classifies well.
        let task = synthetic_classification_task(25, 5).unwrap();
        let acc = task.accuracy(&identity_circuit(4)).unwrap();
        assert!(acc >= 0.95, "accuracy {acc}");
    }

    #[test]
    fn task_validation_catches_shape_mismatches() {
        let c4 = identity_circuit(4);
        let vqe = TaskSpec::Vqe {
            observable: tfim_observable(3).unwrap(),
        };
        assert!(vqe.validate(&c4).is_err(), "observable arity");
        assert!(vqe.accuracy(&c4).is_err(), "accuracy undefined for energies");

        let short_features = TaskSpec::Classify {
            samples: vec![Sample {
                features: vec![0.1; 3],
                label: 0,
            }],
            readout: synthetic_readout(),
        };
        assert!(short_features.validate(&c4).is_err());

        let bad_label = TaskSpec::Classify {
            samples: vec![Sample {
                features: vec![0.1; 4],
                label: 3,
            }],
            readout: synthetic_readout(),
        };
        assert!(bad_label.validate(&c4).is_err());
    }
}
