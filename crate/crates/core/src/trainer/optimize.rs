//! Parameter-update rules behind one interface: plain and adaptive-moment
//! gradient descent for gradient-driven training, and a derivative-free
//! simplex search for objectives trained without gradients.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which update rule `train` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Adaptive-moment gradient descent.
    Adam,
    /// Plain gradient descent with a fixed rate.
    GradientDescent,
    /// Derivative-free downhill simplex.
    Simplex,
}

/// State of a gradient-driven update rule.
#[derive(Debug, Clone)]
pub enum StepOptimizer {
    GradientDescent {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        m: Vec<f64>,
        v: Vec<f64>,
        t: u64,
    },
}

impl StepOptimizer {
    pub fn new(kind: OptimizerKind, lr: f64, dim: usize) -> Option<StepOptimizer> {
        match kind {
            OptimizerKind::GradientDescent => Some(StepOptimizer::GradientDescent { lr }),
            OptimizerKind::Adam => Some(StepOptimizer::Adam {
                lr,
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                m: vec![0.0; dim],
                v: vec![0.0; dim],
                t: 0,
            }),
            OptimizerKind::Simplex => None,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        match self {
            StepOptimizer::GradientDescent { lr } => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= *lr * g;
                }
            }
            StepOptimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
                m,
                v,
                t,
            } => {
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t as i32);
                let bc2 = 1.0 - beta2.powi(*t as i32);
                for i in 0..params.len() {
                    m[i] = *beta1 * m[i] + (1.0 - *beta1) * grad[i];
                    v[i] = *beta2 * v[i] + (1.0 - *beta2) * grad[i] * grad[i];
                    let m_hat = m[i] / bc1;
                    let v_hat = v[i] / bc2;
                    params[i] -= *lr * m_hat / (v_hat.sqrt() + *eps);
                }
            }
        }
    }
}

/// Result of a simplex search.
#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub best: Vec<f64>,
    pub best_loss: f64,
    /// Best vertex after each iteration.
    pub trace: Vec<Vec<f64>>,
}

/// Downhill simplex (reflect / expand / contract / shrink) from `x0` with an
/// axis-aligned initial spread of `init_step`.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    init_step: f64,
    iterations: usize,
) -> Result<SimplexOutcome> {
    let dim = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((f(x0)?, x0.to_vec()));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += init_step;
        simplex.push((f(&x)?, x));
    }

    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        simplex.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
        trace.push(simplex[0].1.clone());

        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|(_, x)| x[i]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();

        let blend = |a: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + a * (centroid[i] - worst.1[i]))
                .collect()
        };

        let reflected = blend(1.0);
        let fr = f(&reflected)?;
        if fr < simplex[0].0 {
            let expanded = blend(2.0);
            let fe = f(&expanded)?;
            simplex[dim] = if fe < fr {
                (fe, expanded)
            } else {
                (fr, reflected)
            };
            continue;
        }
        if fr < simplex[dim - 1].0 {
            simplex[dim] = (fr, reflected);
            continue;
        }
        let contracted = blend(-0.5);
        let fc = f(&contracted)?;
        if fc < worst.0 {
            simplex[dim] = (fc, contracted);
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].1.clone();
        for entry in simplex.iter_mut().skip(1) {
            for i in 0..dim {
                entry.1[i] = best[i] + 0.5 * (entry.1[i] - best[i]);
            }
            entry.0 = f(&entry.1)?;
        }
    }
    simplex.sort_by(|a, b| f64::total_cmp(&a.0, &b.0));
    let (best_loss, best) = simplex.swap_remove(0);
    Ok(SimplexOutcome {
        best,
        best_loss,
        trace,
    })
}
