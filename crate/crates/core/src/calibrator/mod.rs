//! In-situ tuning of per-pair duration stretch ratios.
//!
//! Given a trained circuit, a fitted error table, and a device, the
//! calibrator searches the stretch-ratio box for the assignment that best
//! trades schedule length against predicted coherent error. The objective
//! never touches device truth parameters: durations come from the compiler
//! and error predictions from the table, so the search runs entirely on
//! quantities an experimenter could obtain in situ.

pub mod cma;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use cma::{cma_es_minimize, default_population, CmaConfig, CmaOutcome, GenerationRow};

use crate::compiler::{compile, DsrAssignment};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::lut::{gate_error, ErrorFitParams, Lut, LutEntry};
use crate::pulse::Dsr;
use crate::quantum::{Angle, Circuit, Gate, Param};

/// Settings for a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibConfig {
    /// Weight of the predicted-error term against normalized duration.
    pub alpha: f64,
    /// Search generations.
    pub generations: usize,
    /// Candidates per generation; `None` picks a dimension-based default.
    pub population: Option<usize>,
    /// Initial search step, in stretch-ratio units.
    pub sigma0: f64,
    pub seed: u64,
}

impl Default for CalibConfig {
    fn default() -> Self {
        CalibConfig {
            alpha: 10.0,
            generations: 30,
            population: None,
            sigma0: 0.15,
            seed: 7,
        }
    }
}

impl CalibConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "error weight must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if self.generations == 0 {
            return Err(Error::InvalidArgument(
                "calibration needs at least 1 generation".into(),
            ));
        }
        if let Some(p) = self.population {
            if p < 4 {
                return Err(Error::InvalidArgument(format!(
                    "population must be at least 4, got {p}"
                )));
            }
        }
        if !self.sigma0.is_finite() || self.sigma0 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "initial step must be positive, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }
}

/// Look up the fitted parameters for `pair`, rejecting both absent and
/// failed entries with a clear message.
fn fit_for(lut: &Lut, pair: (usize, usize)) -> Result<&ErrorFitParams> {
    for entry in lut.entries() {
        match entry {
            LutEntry::Fit(fit) if fit.pair() == pair => return Ok(fit),
            LutEntry::Failed {
                control,
                target,
                error,
            } if (*control, *target) == pair => {
                return Err(Error::Configuration(format!(
                    "error-table fit for pair ({control}, {target}) failed: {error}"
                )))
            }
            _ => {}
        }
    }
    Err(Error::Configuration(format!(
        "no error-table entry for coupling pair ({}, {})",
        pair.0, pair.1
    )))
}

/// Every two-qubit gate in `bound` as `(pair, rotation angle)`.
///
/// An echoed half-turn sits at the symmetric point of the error model: its
/// two echo halves cancel the over-rotation, so a plain CX contributes no
/// coherent term — only duration.
fn two_qubit_rotations(bound: &Circuit) -> Result<Vec<((usize, usize), f64)>> {
    let mut out = Vec::new();
    for gate in bound.gates() {
        match gate {
            Gate::Rzx {
                control,
                target,
                angle,
            } => {
                let theta = match angle {
                    Param::Fixed(t) => *t,
                    Param::Free(i) => {
                        return Err(Error::Contract(format!(
                            "parameter {i} still free after binding"
                        )))
                    }
                };
                out.push(((*control, *target), theta));
            }
            Gate::Cx { control, target } => out.push(((*control, *target), FRAC_PI_2)),
            _ => {}
        }
    }
    Ok(out)
}

/// Objective for one stretch assignment: normalized schedule duration plus
/// `alpha` times the predicted coherent error, summed over used pairs with
/// each pair contributing its worst gate.
///
/// Duration is normalized by the same circuit compiled at unit stretch, so
/// the uniform-1 assignment scores exactly `1 + alpha * error`. A stretch
/// that drives some pulse past full amplitude is infeasible and scores
/// `+inf`; saturation at unit stretch itself is a genuine failure and
/// propagates as an error instead.
pub fn calib_loss(
    circuit: &Circuit,
    dsr: &DsrAssignment,
    lut: &Lut,
    dev: &DeviceModel,
    alpha: f64,
) -> Result<f64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "error weight must be finite and non-negative, got {alpha}"
        )));
    }
    let bound = circuit.bound()?;
    let rotations = two_qubit_rotations(&bound)?;
    // Validate table coverage before touching the schedule so a missing
    // entry surfaces as a configuration error, never as the infeasibility
    // sentinel.
    let mut fits: BTreeMap<(usize, usize), &ErrorFitParams> = BTreeMap::new();
    for &(pair, _) in &rotations {
        if !fits.contains_key(&pair) {
            fits.insert(pair, fit_for(lut, pair)?);
        }
    }

    let reference = DsrAssignment::uniform(bound.two_qubit_pairs(), Dsr::ONE);
    let base_ticks = compile(&bound, &reference, dev)?.total_duration();
    let ticks = match compile(&bound, dsr, dev) {
        Ok(prog) => prog.total_duration(),
        Err(Error::AmplitudeSaturation { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let d_norm = if base_ticks == 0 {
        1.0
    } else {
        ticks as f64 / base_ticks as f64
    };

    let mut worst: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (pair, theta) in rotations {
        let stretch = dsr
            .get(pair)
            .ok_or_else(|| {
                Error::Configuration(format!(
                    "no stretch ratio assigned for coupling pair ({}, {})",
                    pair.0, pair.1
                ))
            })?;
        let er = gate_error(Angle::new(theta), stretch, fits[&pair]);
        let slot = worst.entry(pair).or_insert(0.0);
        if er > *slot {
            *slot = er;
        }
    }
    let coherent: f64 = worst.values().sum();
    Ok(d_norm + alpha * coherent)
}

/// A finished calibration: the stretch assignment found, its objective
/// value, and the per-generation search trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub assignment: DsrAssignment,
    pub best_loss: f64,
    pub trace: Vec<GenerationRow>,
    /// Error weight the search ran with.
    pub alpha: f64,
    /// Device clock stamp of the error table used.
    pub lut_clock_days: f64,
}

impl Calibration {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Calibration> {
        Ok(serde_json::from_str(text)?)
    }

    /// The search trace as CSV, one row per generation.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("generation,best_in_generation,best_so_far,sigma,infeasible\n");
        for row in &self.trace {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.generation, row.best_in_generation, row.best_so_far, row.sigma, row.infeasible
            ));
        }
        out
    }
}

/// Search the stretch-ratio box for the assignment minimizing
/// [`calib_loss`] on `circuit`.
///
/// One search coordinate per distinct coupling pair, starting from the
/// uniform unit assignment. The candidate mean is recombined from the
/// population every generation; the reported assignment is the best single
/// evaluation seen, which is the quantity an experimenter would deploy.
pub fn calibrate(
    circuit: &Circuit,
    lut: &Lut,
    dev: &DeviceModel,
    cfg: &CalibConfig,
) -> Result<Calibration> {
    cfg.validate()?;
    let pairs = circuit.two_qubit_pairs();
    if pairs.is_empty() {
        return Err(Error::Configuration(
            "circuit has no two-qubit interactions to calibrate".into(),
        ));
    }
    for &pair in &pairs {
        fit_for(lut, pair)?;
    }

    let dim = pairs.len();
    let cma_cfg = CmaConfig {
        population: cfg.population.unwrap_or_else(|| default_population(dim)),
        generations: cfg.generations,
        sigma0: cfg.sigma0,
        seed: cfg.seed,
        bounds: (Dsr::MIN, Dsr::MAX),
    };
    let x0 = vec![1.0; dim];
    let outcome = cma_es_minimize(
        |x| {
            let mut assign = DsrAssignment::uniform(pairs.iter().copied(), Dsr::ONE);
            for (i, &pair) in pairs.iter().enumerate() {
                assign.insert(pair, Dsr::new(x[i].clamp(Dsr::MIN, Dsr::MAX))?);
            }
            calib_loss(circuit, &assign, lut, dev, cfg.alpha)
        },
        &x0,
        &cma_cfg,
    )?;

    let mut assignment = DsrAssignment::uniform(pairs.iter().copied(), Dsr::ONE);
    for (i, &pair) in pairs.iter().enumerate() {
        assignment.insert(pair, Dsr::new(outcome.best[i].clamp(Dsr::MIN, Dsr::MAX))?);
    }
    Ok(Calibration {
        assignment,
        best_loss: outcome.best_loss,
        trace: outcome.trace,
        alpha: cfg.alpha,
        lut_clock_days: lut.device_clock(),
    })
}
