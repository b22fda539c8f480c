//! Duration-aware variational training: a task loss (energy expectation or
//! classification cross-entropy) plus a regularizer that pulls entangler
//! angles toward {-pi, 0, pi}, where the cross-resonance tone is shortest
//! or vanishes entirely. Training runs on the noiseless statevector; noisy
//! execution happens downstream.

pub mod ansatz;
pub mod optimize;
pub mod tasks;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::compiler::{compile, DsrAssignment};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::pulse::Dsr;
use crate::quantum::Circuit;

pub use optimize::OptimizerKind;
pub use tasks::TaskSpec;

/// Where gradients come from.
///
/// Both variants evaluate the identical exact quantity: expectation
/// gradients of rotation-generated gates satisfy the parameter-shift
/// identity, and on a statevector the two shifted evaluations ARE the
/// analytic gradient with no sampling error. The variants record intent in
/// configs (and leave room for a sampled-shot estimator later).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradSource {
    Statevector,
    ParameterShift,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization strength; the useful range sits below 0.01.
    pub beta: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub grad_source: GradSource,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            beta: 0.005,
            learning_rate: 0.05,
            iterations: 300,
            optimizer: OptimizerKind::Adam,
            seed: 7,
            grad_source: GradSource::Statevector,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "regularization strength must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and > 0, got {}",
                self.learning_rate
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("need at least 1 iteration".into()));
        }
        Ok(())
    }
}

/// Distance from `theta` to the nearest multiple of pi. `round` breaks
/// half-multiple ties away from zero; the distance is pi/2 either way.
fn pi_multiple_residual(theta: f64) -> f64 {
    theta - (theta / PI).round() * PI
}

/// Mean distance of the masked parameters to the nearest multiple of pi —
/// the pulse-length regularizer. An empty mask contributes nothing (logged).
pub fn regu_loss(params: &[f64], rzx_mask: &[usize]) -> f64 {
    if rzx_mask.is_empty() {
        log::warn!("pulse-length regularizer evaluated with no entangler parameters");
        return 0.0;
    }
    rzx_mask
        .iter()
        .map(|&i| pi_multiple_residual(params[i]).abs())
        .sum::<f64>()
        / rzx_mask.len() as f64
}

/// Subgradient of [`regu_loss`]: `sign(residual) / n` on masked
/// coordinates, zero elsewhere and at the kinks (exact multiples of pi,
/// where the distance has a minimum, and exact half-odd multiples, where
/// the rounding switches target).
pub fn regu_subgradient(params: &[f64], rzx_mask: &[usize]) -> Vec<f64> {
    let mut grad = vec![0.0; params.len()];
    if rzx_mask.is_empty() {
        return grad;
    }
    let n = rzx_mask.len() as f64;
    for &i in rzx_mask {
        let r = pi_multiple_residual(params[i]);
        if r == 0.0 || r.abs() == FRAC_PI_2 {
            continue;
        }
        grad[i] = r.signum() / n;
    }
    grad
}

fn with_params(circuit: &Circuit, params: &[f64]) -> Result<Circuit> {
    let mut c = circuit.clone();
    c.set_params(params.to_vec())?;
    Ok(c)
}

/// Task loss at the given parameters.
pub fn task_loss(circuit: &Circuit, params: &[f64], task: &TaskSpec) -> Result<f64> {
    task.loss(&with_params(circuit, params)?)
}

/// Task loss plus `beta` times the pulse-length regularizer.
pub fn total_loss(circuit: &Circuit, params: &[f64], task: &TaskSpec, beta: f64) -> Result<f64> {
    let task_l = task_loss(circuit, params, task)?;
    Ok(task_l + beta * regu_loss(params, &circuit.rzx_param_indices()))
}

/// Exact gradient of [`total_loss`]. The gradient source does not change
/// the value (see [`GradSource`]).
pub fn total_gradient(
    circuit: &Circuit,
    params: &[f64],
    task: &TaskSpec,
    beta: f64,
    _source: GradSource,
) -> Result<Vec<f64>> {
    let mut grad = task.gradient(&with_params(circuit, params)?)?;
    if beta != 0.0 {
        let sub = regu_subgradient(params, &circuit.rzx_param_indices());
        for (g, s) in grad.iter_mut().zip(&sub) {
            *g += beta * s;
        }
    }
    Ok(grad)
}

/// Makespan in ticks of the circuit compiled at unit stretch on a clean
/// reference device — the duration the regularizer is implicitly shrinking.
pub fn compiled_duration_dt(circuit: &Circuit, params: &[f64]) -> Result<u64> {
    let c = with_params(circuit, params)?;
    let dev = DeviceModel::noiseless(c.n().max(2));
    let assignment = DsrAssignment::uniform(c.two_qubit_pairs(), Dsr::ONE);
    Ok(compile(&c, &assignment, &dev)?.total_duration())
}

/// One recorded training step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub task_loss: f64,
    pub regu_loss: f64,
    pub duration_dt: u64,
}

/// Outcome of a training run. The trace has one row per iteration plus a
/// final row at the returned parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub params: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub final_task_loss: f64,
    pub final_regu_loss: f64,
    pub duration_dt: u64,
}

/// Persistable summary of a trained circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Human-readable ansatz descriptor, filled by the caller.
    pub circuit: String,
    pub n_qubits: usize,
    pub params: Vec<f64>,
    pub beta: f64,
    pub final_task_loss: f64,
    pub final_regu_loss: f64,
    pub duration_dt: u64,
}

impl TrainResult {
    pub fn to_model(&self, circuit_desc: &str, n_qubits: usize, beta: f64) -> TrainedModel {
        TrainedModel {
            circuit: circuit_desc.to_string(),
            n_qubits,
            params: self.params.clone(),
            beta,
            final_task_loss: self.final_task_loss,
            final_regu_loss: self.final_regu_loss,
            duration_dt: self.duration_dt,
        }
    }
}

/// Render a training trace as CSV.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("iteration,task_loss,regu_loss,duration_dt\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.iteration, row.task_loss, row.regu_loss, row.duration_dt
        ));
    }
    out
}

/// Train the circuit's free parameters against the task.
///
/// Gradient optimizers follow the configured update rule on the exact total
/// gradient; the simplex optimizer searches the same objective without
/// gradients. A non-finite loss aborts with a divergence error carrying the
/// last finite value.
pub fn train(circuit: &Circuit, task: &TaskSpec, cfg: &TrainConfig) -> Result<TrainResult> {
    cfg.validate()?;
    if circuit.params().is_empty() {
        return Err(Error::InvalidArgument(
            "circuit has no trainable parameters".into(),
        ));
    }
    task.validate(circuit)?;
    match cfg.optimizer {
        OptimizerKind::Simplex => train_simplex(circuit, task, cfg),
        _ => train_gradient(circuit, task, cfg),
    }
}

fn train_gradient(circuit: &Circuit, task: &TaskSpec, cfg: &TrainConfig) -> Result<TrainResult> {
    let mask = circuit.rzx_param_indices();
    let mut params = circuit.params().to_vec();
    let mut opt = optimize::StepOptimizer::new(cfg.optimizer, cfg.learning_rate, params.len())
        .expect("gradient-driven optimizer");
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let mut last_finite = f64::INFINITY;

    for iteration in 0..=cfg.iterations {
        let work = with_params(circuit, &params)?;
        let task_l = task.loss(&work)?;
        let regu = regu_loss(&params, &mask);
        let total = task_l + cfg.beta * regu;
        if !total.is_finite() {
            return Err(Error::Divergence {
                iteration,
                last_loss: last_finite,
            });
        }
        last_finite = total;
        let duration_dt = compiled_duration_dt(circuit, &params)?;
        trace.push(TraceRow {
            iteration,
            task_loss: task_l,
            regu_loss: regu,
            duration_dt,
        });
        if iteration == cfg.iterations {
            break;
        }

        let mut grad = task.gradient(&work)?;
        if cfg.beta != 0.0 {
            let sub = regu_subgradient(&params, &mask);
            for (g, s) in grad.iter_mut().zip(&sub) {
                *g += cfg.beta * s;
            }
        }
        opt.step(&mut params, &grad);
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence {
                iteration: iteration + 1,
                last_loss: last_finite,
            });
        }
    }

    let last = trace.last().expect("at least one row");
    Ok(TrainResult {
        final_task_loss: last.task_loss,
        final_regu_loss: last.regu_loss,
        duration_dt: last.duration_dt,
        params,
        trace,
    })
}

fn train_simplex(circuit: &Circuit, task: &TaskSpec, cfg: &TrainConfig) -> Result<TrainResult> {
    let mask = circuit.rzx_param_indices();
    let mut evals = 0usize;
    let mut last_finite = f64::INFINITY;
    let objective = |x: &[f64]| -> Result<f64> {
        let total = task.loss(&with_params(circuit, x)?)? + cfg.beta * regu_loss(x, &mask);
        if !total.is_finite() {
            return Err(Error::Divergence {
                iteration: evals,
                last_loss: last_finite,
            });
        }
        evals += 1;
        last_finite = total;
        Ok(total)
    };
    let out = optimize::nelder_mead(objective, circuit.params(), 0.25, cfg.iterations)?;

    let mut trace = Vec::with_capacity(out.trace.len() + 1);
    for (iteration, x) in out.trace.iter().chain([&out.best]).enumerate() {
        let task_l = task.loss(&with_params(circuit, x)?)?;
        trace.push(TraceRow {
            iteration,
            task_loss: task_l,
            regu_loss: regu_loss(x, &mask),
            duration_dt: compiled_duration_dt(circuit, x)?,
        });
    }
    let last = trace.last().expect("at least one row");
    Ok(TrainResult {
        final_task_loss: last.task_loss,
        final_regu_loss: last.regu_loss,
        duration_dt: last.duration_dt,
        params: out.best,
        trace,
    })
}
