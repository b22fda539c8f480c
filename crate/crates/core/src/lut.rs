//! Per-pair gate-error lookup table: benchmark grid construction, weighted
//! least-squares fitting of the control-error model, and closed-form
//! prediction of measured values and gate error rates.
//!
//! The fitted model for the probability of reading `00` after a single
//! `Rzx(theta)` on `|00>` is
//!
//! ```text
//! y(theta, dsr) = (cos(theta) - k1 * sin(theta) * sin(eps) + 1) / 2
//! eps(theta, dsr) = (k2 * (dsr - 1) + b) * sign(theta - pi/2)
//! ```
//!
//! with `sign(0) = 0`. `k2` and `b` capture the stretch-dependent and
//! constant parts of the coherent over-rotation; `k1` scales the visible
//! contrast of that error. When `eps` is small, `k1` is nearly
//! unidentifiable on noisy data (only the products `k1*k2` and `k1*b`
//! matter to first order), so the solver anchors `k1` at 1 with a penalty
//! whose weight tracks the estimated noise level: exact data still recovers
//! the true `k1` (the penalty vanishes with the residuals), while shot-noisy
//! data reports `k1 ~ 1` and folds the scale into `k2` and `b`.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::pulse::Dsr;
use crate::quantum::Angle;

/// Lower end of the benchmark rotation-angle grid.
pub const THETA_GRID_LO: f64 = PI / 8.0;

/// Upper end of the benchmark rotation-angle grid.
pub const THETA_GRID_HI: f64 = 7.0 * PI / 8.0;

/// Default number of rotation angles per pair.
pub const DEFAULT_N1: usize = 9;

/// Default number of stretch ratios per pair.
pub const DEFAULT_N2: usize = 5;

/// Default shots per benchmark point.
pub const DEFAULT_SHOTS: u64 = 8192;

/// Sign function with `sign(0) = 0`, the convention the error model relies
/// on at the quarter-turn angle.
fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fitted error-model parameters for one directed coupling pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorFitParams {
    pub control: usize,
    pub target: usize,
    /// Contrast of the coherent error term; in (0, 1.5].
    pub k1: f64,
    /// Over-rotation slope per unit of stretch away from 1.
    pub k2: f64,
    /// Constant over-rotation offset.
    pub b: f64,
    /// Shots-weighted RMS misfit, in probability units.
    pub residual_rms: f64,
    /// Device clock (days) when the benchmark data was taken; 0 for fits on
    /// offline data.
    pub timestamp: f64,
    /// Distinct rotation angles in the fitted data.
    pub n1: usize,
    /// Distinct stretch ratios in the fitted data.
    pub n2: usize,
    /// Nominal shots per benchmark point.
    pub shots: u64,
}

impl ErrorFitParams {
    pub fn pair(&self) -> (usize, usize) {
        (self.control, self.target)
    }
}

fn model_p00(theta: f64, dsr: f64, k1: f64, k2: f64, b: f64) -> f64 {
    let eps = (k2 * (dsr - 1.0) + b) * sign0(theta - FRAC_PI_2);
    (theta.cos() - k1 * theta.sin() * eps.sin() + 1.0) / 2.0
}

/// Predicted probability of measuring `00` after `Rzx(theta)` on `|00>`,
/// clamped to `[0, 1]` (the raw model can leave the interval for extreme
/// parameter values; a clamp is logged).
pub fn predict_p00(theta: Angle, dsr: Dsr, fit: &ErrorFitParams) -> f64 {
    let t = theta.radians();
    debug_assert!(t > 0.0 && t < PI, "rotation angle must lie in (0, pi)");
    let y = model_p00(t, dsr.value(), fit.k1, fit.k2, fit.b);
    if (0.0..=1.0).contains(&y) {
        y
    } else {
        log::warn!(
            "predicted value {y:.6} at theta={t:.4}, dsr={:.4} clamped to [0, 1]",
            dsr.value()
        );
        y.clamp(0.0, 1.0)
    }
}

/// Predicted gate error rate: the absolute deviation of the modelled `00`
/// probability from its error-free value, `|k1 * sin(theta) * sin(eps)| / 2`.
pub fn gate_error(theta: Angle, dsr: Dsr, fit: &ErrorFitParams) -> f64 {
    let t = theta.radians();
    let eps = (fit.k2 * (dsr.value() - 1.0) + fit.b) * sign0(t - FRAC_PI_2);
    (fit.k1 * t.sin() * eps.sin()).abs() / 2.0
}

/// One benchmark point of the table-building grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub control: usize,
    pub target: usize,
    pub theta: Angle,
    pub dsr: Dsr,
}

/// Uniform rotation-angle grid over `[pi/8, 7pi/8]`. A point landing on
/// `pi/2` is shifted up by half a stride: the sign factor vanishes there,
/// so the point would carry no slope or offset information.
pub fn theta_grid(n1: usize) -> Result<Vec<f64>> {
    if n1 < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 rotation angles on each side of the grid, got {n1}"
        )));
    }
    let stride = (THETA_GRID_HI - THETA_GRID_LO) / (n1 - 1) as f64;
    Ok((0..n1)
        .map(|i| {
            let theta = THETA_GRID_LO + i as f64 * stride;
            if (theta - FRAC_PI_2).abs() < 1e-9 {
                theta + stride / 2.0
            } else {
                theta
            }
        })
        .collect())
}

/// Uniform stretch-ratio grid spanning the full allowed range.
pub fn dsr_grid(n2: usize) -> Result<Vec<Dsr>> {
    if n2 < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 stretch ratios, got {n2}"
        )));
    }
    let stride = (Dsr::MAX - Dsr::MIN) / (n2 - 1) as f64;
    (0..n2)
        .map(|j| Dsr::new((Dsr::MIN + j as f64 * stride).clamp(Dsr::MIN, Dsr::MAX)))
        .collect()
}

/// Full benchmark grid: every pair crossed with every angle and stretch
/// ratio, pair-major, angles and ratios sorted ascending.
pub fn build_grid(pairs: &[(usize, usize)], n1: usize, n2: usize) -> Result<Vec<GridPoint>> {
    let thetas = theta_grid(n1)?;
    let dsrs = dsr_grid(n2)?;
    let mut out = Vec::with_capacity(pairs.len() * n1 * n2);
    for &(control, target) in pairs {
        for &theta in &thetas {
            for &dsr in &dsrs {
                out.push(GridPoint {
                    control,
                    target,
                    theta: Angle::new(theta),
                    dsr,
                });
            }
        }
    }
    Ok(out)
}

/// One measured benchmark point for fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub theta: Angle,
    pub dsr: Dsr,
    pub p00: f64,
    pub shots: u64,
}

const K1_BOUNDS: (f64, f64) = (1e-6, 1.5);
const K2_BOUNDS: (f64, f64) = (-0.5, 0.5);
const B_BOUNDS: (f64, f64) = (-0.2, 0.2);

/// Gain of the noise-scaled anchor that pins `k1` toward 1 when the data
/// cannot resolve it (see the module docs).
const ANCHOR_GAIN: f64 = 1.0;

struct FitPoint {
    sin_t: f64,
    cos_t: f64,
    /// sign(theta - pi/2)
    s: f64,
    /// dsr - 1
    u: f64,
    w: f64,
    p: f64,
}

struct FitProblem {
    points: Vec<FitPoint>,
    mean_w: f64,
    sum_w: f64,
}

impl FitProblem {
    fn new(measurements: &[Measurement]) -> FitProblem {
        let points: Vec<FitPoint> = measurements
            .iter()
            .map(|m| {
                let t = m.theta.radians();
                FitPoint {
                    sin_t: t.sin(),
                    cos_t: t.cos(),
                    s: sign0(t - FRAC_PI_2),
                    u: m.dsr.value() - 1.0,
                    w: m.shots as f64,
                    p: m.p00,
                }
            })
            .collect();
        let sum_w: f64 = points.iter().map(|p| p.w).sum();
        let mean_w = sum_w / points.len() as f64;
        FitProblem {
            points,
            mean_w,
            sum_w,
        }
    }

    fn residual(&self, pt: &FitPoint, x: &Vector3<f64>) -> f64 {
        let eps = (x[1] * pt.u + x[2]) * pt.s;
        (pt.cos_t - x[0] * pt.sin_t * eps.sin() + 1.0) / 2.0 - pt.p
    }

    fn data_sse(&self, x: &Vector3<f64>) -> f64 {
        self.points
            .iter()
            .map(|pt| {
                let r = self.residual(pt, x);
                pt.w * r * r
            })
            .sum()
    }

    /// Anchor weight for the `(k1 - 1)^2` penalty: the per-point noise
    /// variance estimated from the current misfit, times the mean weight.
    /// Exact data drives this to zero; shot-noisy data keeps it large
    /// relative to the (tiny) curvature the data itself has along `k1`.
    fn anchor_weight(&self, sse: f64) -> f64 {
        let dof = (self.points.len().saturating_sub(3)).max(1) as f64;
        ANCHOR_GAIN * (sse / dof) * self.mean_w
    }

    fn objective(&self, x: &Vector3<f64>, tau: f64) -> f64 {
        self.data_sse(x) + tau * (x[0] - 1.0) * (x[0] - 1.0)
    }

    /// Normal equations of the anchored problem at `x`: `h` is the
    /// Gauss-Newton Hessian approximation, `g` the gradient (both without
    /// the common factor 2).
    fn normal_equations(&self, x: &Vector3<f64>, tau: f64) -> (Matrix3<f64>, Vector3<f64>) {
        let mut h = Matrix3::zeros();
        let mut g = Vector3::zeros();
        for pt in &self.points {
            let eps = (x[1] * pt.u + x[2]) * pt.s;
            let (sin_e, cos_e) = (eps.sin(), eps.cos());
            let r = (pt.cos_t - x[0] * pt.sin_t * sin_e + 1.0) / 2.0 - pt.p;
            let j = Vector3::new(
                -pt.sin_t * sin_e / 2.0,
                -x[0] * pt.sin_t * cos_e * pt.s * pt.u / 2.0,
                -x[0] * pt.sin_t * cos_e * pt.s / 2.0,
            );
            h += pt.w * j * j.transpose();
            g += pt.w * r * j;
        }
        h[(0, 0)] += tau;
        g[0] += tau * (x[0] - 1.0);
        (h, g)
    }
}

fn clamp_to_bounds(mut x: Vector3<f64>) -> Vector3<f64> {
    x[0] = x[0].clamp(K1_BOUNDS.0, K1_BOUNDS.1);
    x[1] = x[1].clamp(K2_BOUNDS.0, K2_BOUNDS.1);
    x[2] = x[2].clamp(B_BOUNDS.0, B_BOUNDS.1);
    x
}

/// Golden-section minimization of `f` over `[lo, hi]`.
fn golden_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// One coordinate-descent pass from `start`: full-interval line searches on
/// the slope, offset, and contrast coordinates in turn.
fn coordinate_descent(problem: &FitProblem, start: Vector3<f64>) -> Vector3<f64> {
    let mut x = clamp_to_bounds(start);
    for _ in 0..6 {
        let tau = problem.anchor_weight(problem.data_sse(&x));
        for (coord, bounds) in [(1, K2_BOUNDS), (2, B_BOUNDS), (0, K1_BOUNDS)] {
            let best = golden_min(bounds.0, bounds.1, |v| {
                let mut cand = x;
                cand[coord] = v;
                problem.objective(&cand, tau)
            });
            x[coord] = best;
        }
    }
    x
}

/// Levenberg-damped Gauss-Newton refinement of the anchored objective.
fn gauss_newton(problem: &FitProblem, start: Vector3<f64>) -> Vector3<f64> {
    let mut x = clamp_to_bounds(start);
    let mut lambda = 1e-3;
    let mut sse = problem.data_sse(&x);
    for _ in 0..120 {
        let tau = problem.anchor_weight(sse);
        let obj = sse + tau * (x[0] - 1.0) * (x[0] - 1.0);
        let (h, g) = problem.normal_equations(&x, tau);
        let mut accepted = false;
        for _ in 0..16 {
            let mut damped = h;
            for i in 0..3 {
                damped[(i, i)] += lambda * h[(i, i)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-g)) else {
                lambda *= 4.0;
                continue;
            };
            let cand = clamp_to_bounds(x + step);
            let cand_sse = problem.data_sse(&cand);
            let cand_obj = cand_sse + tau * (cand[0] - 1.0) * (cand[0] - 1.0);
            if cand_obj <= obj {
                let gain = obj - cand_obj;
                x = cand;
                sse = cand_sse;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if gain < 1e-15 * (1.0 + obj) {
                    return x;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// Fit `(k1, k2, b)` to benchmark measurements of one coupling pair by
/// shots-weighted least squares: multi-start coordinate descent followed by
/// a damped Gauss-Newton refinement, with `k1` softly anchored at 1 (see
/// the module docs for why).
pub fn fit_error_params(
    measurements: &[Measurement],
    pair: (usize, usize),
) -> Result<ErrorFitParams> {
    let (control, target) = pair;
    if measurements.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "need at least 6 measurements to fit 3 parameters, got {}",
            measurements.len()
        )));
    }
    for m in measurements {
        let t = m.theta.radians();
        if !(t > 0.0 && t < PI) {
            return Err(Error::InvalidArgument(format!(
                "rotation angle {t} outside (0, pi)"
            )));
        }
        if !(0.0..=1.0).contains(&m.p00) {
            return Err(Error::InvalidArgument(format!(
                "measured probability {} outside [0, 1]",
                m.p00
            )));
        }
        if m.shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
    }

    let distinct = |values: &mut Vec<f64>| {
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        values.len()
    };
    let mut dsrs: Vec<f64> = measurements.iter().map(|m| m.dsr.value()).collect();
    let n2 = distinct(&mut dsrs);
    if n2 < 2 {
        return Err(Error::IllPosedFit {
            control,
            target,
            axis: "dsr".into(),
        });
    }
    let mut thetas: Vec<f64> = measurements.iter().map(|m| m.theta.radians()).collect();
    let n1 = distinct(&mut thetas);
    let below = thetas.iter().any(|&t| t < FRAC_PI_2 - 1e-9);
    let above = thetas.iter().any(|&t| t > FRAC_PI_2 + 1e-9);
    if !(below && above) {
        return Err(Error::IllPosedFit {
            control,
            target,
            axis: "theta".into(),
        });
    }

    let problem = FitProblem::new(measurements);
    let mut best: Option<(f64, Vector3<f64>)> = None;
    for k2_start in [-0.3, 0.0, 0.3] {
        for b_start in [-0.12, 0.0, 0.12] {
            let x = coordinate_descent(&problem, Vector3::new(1.0, k2_start, b_start));
            let sse = problem.data_sse(&x);
            if best.as_ref().is_none_or(|(s, _)| sse < *s) {
                best = Some((sse, x));
            }
        }
    }
    let x = gauss_newton(&problem, best.expect("at least one start").1);
    let residual_rms = (problem.data_sse(&x) / problem.sum_w).sqrt();

    Ok(ErrorFitParams {
        control,
        target,
        k1: x[0],
        k2: x[1],
        b: x[2],
        residual_rms,
        timestamp: 0.0,
        n1,
        n2,
        shots: measurements.iter().map(|m| m.shots).max().unwrap_or(0),
    })
}

/// One table row: a successful fit, or a marker for a pair whose data could
/// not be fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LutEntry {
    Fit(ErrorFitParams),
    Failed {
        control: usize,
        target: usize,
        error: String,
    },
}

impl LutEntry {
    pub fn pair(&self) -> (usize, usize) {
        match self {
            LutEntry::Fit(fit) => (fit.control, fit.target),
            LutEntry::Failed {
                control, target, ..
            } => (*control, *target),
        }
    }
}

/// Lookup table of fitted error models, stamped with the device clock at
/// build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lut {
    device_clock: f64,
    /// Benchmark circuits executed to build the table.
    executions: usize,
    entries: Vec<LutEntry>,
}

impl Lut {
    pub fn device_clock(&self) -> f64 {
        self.device_clock
    }

    pub fn executions(&self) -> usize {
        self.executions
    }

    pub fn entries(&self) -> &[LutEntry] {
        &self.entries
    }

    /// Fitted parameters for a pair; `None` if the pair is absent or its
    /// fit failed.
    pub fn get(&self, pair: (usize, usize)) -> Option<&ErrorFitParams> {
        self.entries.iter().find_map(|e| match e {
            LutEntry::Fit(fit) if fit.pair() == pair => Some(fit),
            _ => None,
        })
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entries.iter().map(LutEntry::pair).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Lut> {
        let lut: Lut = serde_json::from_str(text)?;
        for (i, entry) in lut.entries.iter().enumerate() {
            if let LutEntry::Fit(fit) = entry {
                if !(fit.k1 > 0.0 && fit.k1 <= K1_BOUNDS.1) {
                    return Err(Error::Schema {
                        path: format!("entries[{i}].k1"),
                        message: format!("contrast {} outside (0, {}]", fit.k1, K1_BOUNDS.1),
                    });
                }
                if !(fit.residual_rms >= 0.0) {
                    return Err(Error::Schema {
                        path: format!("entries[{i}].residual_rms"),
                        message: "negative residual".into(),
                    });
                }
            }
        }
        Ok(lut)
    }

    /// Reject tables that mention pairs outside the device coupling map.
    pub fn validate_against(&self, dev: &DeviceModel) -> Result<()> {
        let coupling: BTreeSet<(usize, usize)> = dev.coupling_pairs().into_iter().collect();
        for (i, entry) in self.entries.iter().enumerate() {
            let pair = entry.pair();
            if !coupling.contains(&pair) {
                return Err(Error::Schema {
                    path: format!("entries[{i}]"),
                    message: format!(
                        "pair ({}, {}) is not in the device coupling map",
                        pair.0, pair.1
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Build the full table: benchmark every grid point on the device, then fit
/// each pair. Runs exactly `|pairs| * n1 * n2` benchmark circuits. A pair
/// whose fit is rejected as ill-posed is recorded with a failure marker.
pub fn build_lut(
    dev: &DeviceModel,
    pairs: &[(usize, usize)],
    n1: usize,
    n2: usize,
    shots: u64,
    seed: u64,
) -> Result<Lut> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one coupling pair".into(),
        ));
    }
    let coupling: BTreeSet<(usize, usize)> = dev.coupling_pairs().into_iter().collect();
    for &pair in pairs {
        if !coupling.contains(&pair) {
            return Err(Error::Configuration(format!(
                "pair ({}, {}) is not in the device coupling map",
                pair.0, pair.1
            )));
        }
    }

    let grid = build_grid(pairs, n1, n2)?;
    let mut executions = 0usize;
    let mut entries = Vec::with_capacity(pairs.len());
    for (pi, &(control, target)) in pairs.iter().enumerate() {
        let mut measurements = Vec::with_capacity(n1 * n2);
        for point in &grid[pi * n1 * n2..(pi + 1) * n1 * n2] {
            let point_seed = seed
                .wrapping_add((executions as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let p00 =
                dev.benchmark_rzx((control, target), point.theta, point.dsr, shots, point_seed)?;
            executions += 1;
            measurements.push(Measurement {
                theta: point.theta,
                dsr: point.dsr,
                p00,
                shots,
            });
        }
        match fit_error_params(&measurements, (control, target)) {
            Ok(mut fit) => {
                fit.timestamp = dev.clock_days();
                entries.push(LutEntry::Fit(fit));
            }
            Err(e @ (Error::IllPosedFit { .. } | Error::InvalidArgument(_))) => {
                log::warn!("fit failed for pair ({control}, {target}): {e}");
                entries.push(LutEntry::Failed {
                    control,
                    target,
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    assert_eq!(
        executions,
        pairs.len() * n1 * n2,
        "benchmark execution count must equal pairs * n1 * n2"
    );

    Ok(Lut {
        device_clock: dev.clock_days(),
        executions,
        entries,
    })
}
