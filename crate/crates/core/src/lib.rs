//! Duration-aware training and calibration of Rzx-basis circuits against a
//! synthetic drifting-noise device.
//!
//! The crate is organized as a pipeline:
//!
//! * [`quantum`] — exact statevector simulation, observables, parameter-shift
//!   gradients, dense unitary extraction.
//! * [`pulse`] — GaussianSquare pulse model: areas, angle-proportional area
//!   scaling, area-preserving duration stretches, pulse schedules.
//! * [`compiler`] — CX -> Rzx rewriting, Rzx angle normalization, ASAP pulse
//!   scheduling in both the CNOT and the Rzx basis.
//! * [`device`] — the synthetic device: coherent over-rotation, stochastic
//!   Pauli noise, readout error, parameter drift, benchmark execution.
//! * [`lut`] — benchmark grids and per-pair error-model fits (k1, k2, b).
//! * [`trainer`] — duration-regularized variational training (VQE and
//!   classification) on the noiseless simulator.
//! * [`calibrator`] — CMA-ES search for per-pair duration-stretch ratios that
//!   trade schedule length against predicted gate error.
//!
//! All randomness is seeded; every artifact (device snapshots, LUTs, trained
//! models, calibration reports) serializes to JSON deterministically.

pub mod calibrator;
pub mod compiler;
pub mod device;
pub mod error;
pub mod lut;
pub mod pulse;
pub mod quantum;
pub mod trainer;

pub use error::{Error, Result};
