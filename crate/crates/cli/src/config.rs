//! Pipeline configuration: one JSON document wires every stage to the same
//! device snapshot, output directory, and seed discipline.
//!
//! Sections are optional and sparse — any field left out falls back to the
//! library default, and any absent per-stage seed falls back to the global
//! seed, so a minimal config stays a few lines while a fully pinned one
//! spells out everything.

use std::fs;
use std::path::{Path, PathBuf};

use qupad_core::calibrator::CalibConfig;
use qupad_core::trainer::{GradSource, OptimizerKind, TrainConfig};
use qupad_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which objective training optimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskConfig {
    /// Transverse-field Ising ground-state search over the ansatz qubits.
    Tfim,
    /// Seeded three-class discrimination on four feature angles (requires a
    /// four-qubit ansatz).
    Classify {
        /// Samples generated per class.
        per_class: Option<usize>,
        /// Dataset seed; defaults to the global seed.
        seed: Option<u64>,
    },
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig::Tfim
    }
}

/// Shape of the trainable circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub qubits: usize,
    pub layers: usize,
    /// Seed for the initial parameter values; defaults to the global seed.
    pub seed: Option<u64>,
}

/// Sparse overlay over the trainer defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub beta: Option<f64>,
    pub learning_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub optimizer: Option<OptimizerKind>,
    pub grad_source: Option<GradSource>,
    pub seed: Option<u64>,
}

impl TrainSection {
    fn materialize(&self, global_seed: u64) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            beta: self.beta.unwrap_or(d.beta),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            iterations: self.iterations.unwrap_or(d.iterations),
            optimizer: self.optimizer.unwrap_or(d.optimizer),
            grad_source: self.grad_source.unwrap_or(d.grad_source),
            seed: self.seed.unwrap_or(global_seed),
        }
    }
}

/// Benchmark-grid shape and shot budget for error-table construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LutSection {
    /// Rotation angles per pair (default 9).
    pub n1: Option<usize>,
    /// Stretch ratios per pair (default 5).
    pub n2: Option<usize>,
    /// Shots per benchmark execution (default 4096).
    pub shots: Option<u64>,
    /// Benchmark seed; defaults to the global seed.
    pub seed: Option<u64>,
}

impl LutSection {
    pub fn n1(&self) -> usize {
        self.n1.unwrap_or(9)
    }
    pub fn n2(&self) -> usize {
        self.n2.unwrap_or(5)
    }
    pub fn shots(&self) -> u64 {
        self.shots.unwrap_or(4096)
    }
}

/// Sparse overlay over the calibration-search defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibSection {
    pub alpha: Option<f64>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub sigma0: Option<f64>,
    pub seed: Option<u64>,
}

impl CalibSection {
    fn materialize(&self, global_seed: u64) -> CalibConfig {
        let d = CalibConfig::default();
        CalibConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            generations: self.generations.unwrap_or(d.generations),
            population: self.population.or(d.population),
            sigma0: self.sigma0.unwrap_or(d.sigma0),
            seed: self.seed.unwrap_or(global_seed),
        }
    }
}

/// The whole pipeline wiring, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Device snapshot the pipeline runs against.
    pub device: PathBuf,
    /// Directory all artifacts are written to.
    pub out: PathBuf,
    /// Global seed; per-stage seeds default to it.
    pub seed: Option<u64>,
    #[serde(default)]
    pub task: TaskConfig,
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub lut: LutSection,
    #[serde(default)]
    pub calib: CalibSection,
    /// Execution shots for `run` and the stretch-sweep report (default
    /// 4096).
    pub shots: Option<u64>,
}

impl PipelineConfig {
    /// Load from disk and apply command-line overrides; checks that the
    /// referenced device snapshot exists.
    pub fn load(
        path: &Path,
        seed_override: Option<u64>,
        out_override: Option<PathBuf>,
    ) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)?;
        if let Some(seed) = seed_override {
            cfg.seed = Some(seed);
        }
        if let Some(out) = out_override {
            cfg.out = out;
        }
        if !cfg.device.exists() {
            return Err(Error::Configuration(format!(
                "device snapshot not found: {}",
                cfg.device.display()
            )));
        }
        if cfg.ansatz.qubits < 2 {
            return Err(Error::Configuration(format!(
                "ansatz needs at least 2 qubits, got {}",
                cfg.ansatz.qubits
            )));
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(7)
    }

    pub fn ansatz_seed(&self) -> u64 {
        self.ansatz.seed.unwrap_or_else(|| self.seed())
    }

    pub fn lut_seed(&self) -> u64 {
        self.lut.seed.unwrap_or_else(|| self.seed())
    }

    pub fn shots(&self) -> u64 {
        self.shots.unwrap_or(4096)
    }

    pub fn train_config(&self) -> TrainConfig {
        self.train.materialize(self.seed())
    }

    pub fn calib_config(&self) -> CalibConfig {
        self.calib.materialize(self.seed())
    }
}
