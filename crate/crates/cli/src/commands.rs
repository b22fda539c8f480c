//! Subcommand implementations: each one reads its inputs, drives the
//! library, writes artifacts under the configured output directory, and
//! prints a short summary. All artifacts are JSON or CSV; the only time
//! axis in any of them is the device clock.

use std::fs;
use std::path::{Path, PathBuf};

use qupad_core::calibrator::{calibrate, Calibration};
use qupad_core::compiler::{compile, rzx_duration_ticks, DsrAssignment};
use qupad_core::device::{DeviceModel, ExecutionResult};
use qupad_core::lut::{build_lut, dsr_grid, theta_grid, Lut, LutEntry};
use qupad_core::pulse::Dsr;
use qupad_core::quantum::{simulate, Angle, Circuit, Gate};
use qupad_core::trainer::ansatz::hardware_efficient_ansatz;
use qupad_core::trainer::tasks::{synthetic_classification_task, tfim_observable};
use qupad_core::trainer::{trace_csv, train, TaskSpec, TrainedModel};
use qupad_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, TaskConfig};

// ------------------------------------------------------------ persistence

fn load_device(path: &Path) -> Result<DeviceModel> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Configuration(format!("cannot read device snapshot {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_device(dev: &DeviceModel, path: &Path) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(dev)?)
}

/// Write with a trailing newline so artifacts diff cleanly.
fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let body = if text.ends_with('\n') {
        text.to_string()
    } else {
        format!("{text}\n")
    };
    fs::write(path, body)?;
    Ok(())
}

fn read_model(cfg: &PipelineConfig) -> Result<TrainedModel> {
    let path = cfg.out.join("model.json");
    let text = fs::read_to_string(&path).map_err(|e| {
        Error::Configuration(format!(
            "cannot read trained model {} (run `train` first): {e}",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_lut(cfg: &PipelineConfig) -> Result<Lut> {
    let path = cfg.out.join("lut.json");
    let text = fs::read_to_string(&path).map_err(|e| {
        Error::Configuration(format!(
            "cannot read error table {} (run `lut` first): {e}",
            path.display()
        ))
    })?;
    Lut::from_json(&text)
}

// --------------------------------------------------------------- circuits

fn build_ansatz(cfg: &PipelineConfig) -> Result<Circuit> {
    hardware_efficient_ansatz(cfg.ansatz.qubits, cfg.ansatz.layers, cfg.ansatz_seed())
}

fn build_task(cfg: &PipelineConfig) -> Result<TaskSpec> {
    match &cfg.task {
        TaskConfig::Tfim => Ok(TaskSpec::Vqe {
            observable: tfim_observable(cfg.ansatz.qubits)?,
        }),
        TaskConfig::Classify { per_class, seed } => {
            synthetic_classification_task(per_class.unwrap_or(8), seed.unwrap_or_else(|| cfg.seed()))
        }
    }
}

/// Rebuild the trained circuit: the configured ansatz bound to the stored
/// parameters.
fn trained_circuit(cfg: &PipelineConfig, model: &TrainedModel) -> Result<Circuit> {
    if model.n_qubits != cfg.ansatz.qubits {
        return Err(Error::Configuration(format!(
            "trained model is for {} qubits but the configuration says {}",
            model.n_qubits, cfg.ansatz.qubits
        )));
    }
    let ansatz = build_ansatz(cfg)?;
    Circuit::new(ansatz.n(), ansatz.gates().to_vec(), model.params.clone())?.bound()
}

fn with_measure(c: &Circuit) -> Result<Circuit> {
    let mut m = c.clone();
    m.push(Gate::Measure {
        qubits: (0..c.n()).collect(),
    })?;
    Ok(m)
}

fn with_h_measure(c: &Circuit) -> Result<Circuit> {
    let mut m = c.clone();
    for q in 0..c.n() {
        m.push(Gate::h(q))?;
    }
    m.push(Gate::Measure {
        qubits: (0..c.n()).collect(),
    })?;
    Ok(m)
}

// ------------------------------------------------------------- statistics

fn counts_to_probs(result: &ExecutionResult, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; 1 << n];
    for (key, c) in &result.counts {
        let mut idx = 0usize;
        for (j, ch) in key.chars().enumerate() {
            if ch == '1' {
                idx |= 1 << (n - 1 - j);
            }
        }
        p[idx] += *c as f64 / result.shots as f64;
    }
    p
}

fn fidelity_vs(ideal: &[f64], measured: &[f64]) -> f64 {
    let tvd: f64 = ideal
        .iter()
        .zip(measured)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0;
    1.0 - tvd
}

/// Open-chain transverse-field Ising energy from a Z-basis run plus an
/// X-basis (Hadamard-rotated) run.
fn tfim_energy(z_run: &ExecutionResult, x_run: &ExecutionResult, n: usize) -> f64 {
    let z_values = |key: &str| -> Vec<f64> {
        let mut z = vec![1.0; n];
        for (j, ch) in key.chars().enumerate() {
            if ch == '1' {
                z[n - 1 - j] = -1.0;
            }
        }
        z
    };
    let mut e = 0.0;
    for (key, c) in &z_run.counts {
        let z = z_values(key);
        let w = *c as f64 / z_run.shots as f64;
        for i in 0..n - 1 {
            e -= w * z[i] * z[i + 1];
        }
    }
    for (key, c) in &x_run.counts {
        let z = z_values(key);
        let w = *c as f64 / x_run.shots as f64;
        for zi in z {
            e -= w * zi;
        }
    }
    e
}

// ----------------------------------------------------------------- device

pub fn device_new(qubits: usize, seed: u64, out: &Path) -> Result<()> {
    let dev = DeviceModel::new_seeded(qubits, seed)?;
    write_device(&dev, out)?;
    println!(
        "wrote device snapshot {} ({} qubits, {} coupling pairs, clock {:.3} days)",
        out.display(),
        dev.n_qubits(),
        dev.coupling_pairs().len(),
        dev.clock_days()
    );
    Ok(())
}

pub fn device_drift(snapshot: &Path, days: f64, out: Option<PathBuf>) -> Result<()> {
    let dev = load_device(snapshot)?;
    let drifted = dev.drift(days)?;
    let target = out.unwrap_or_else(|| snapshot.to_path_buf());
    write_device(&drifted, &target)?;
    println!(
        "advanced {} by {days} days -> {} (clock {:.3} days)",
        snapshot.display(),
        target.display(),
        drifted.clock_days()
    );
    Ok(())
}

pub fn device_show(snapshot: &Path) -> Result<()> {
    let dev = load_device(snapshot)?;
    println!(
        "device: {} qubits, clock {:.3} days",
        dev.n_qubits(),
        dev.clock_days()
    );
    // Read parameters off the snapshot document itself so the listing
    // matches the file byte for byte.
    let v = serde_json::to_value(&dev)?;
    for pair in v["pairs"].as_array().into_iter().flatten() {
        println!(
            "  pair ({}, {}): k1 {:.4}  k2 {:.4}  b {:.4}  base amp {:.3} width {} ticks",
            pair["control"], pair["target"], f(&pair["k1"]), f(&pair["k2"]), f(&pair["b"]),
            f(&pair["base"]["amp"]), pair["base"]["width"]
        );
    }
    for (q, qubit) in v["qubits"].as_array().into_iter().flatten().enumerate() {
        println!(
            "  qubit {q}: T1 {:.1} us  T2 {:.1} us  readout flip {:.4}",
            f(&qubit["t1_us"]),
            f(&qubit["t2_us"]),
            f(&qubit["readout_flip"])
        );
    }
    Ok(())
}

fn f(v: &serde_json::Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

// ------------------------------------------------------------------ train

pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let ansatz = build_ansatz(cfg)?;
    let task = build_task(cfg)?;
    task.validate(&ansatz)?;
    let tcfg = cfg.train_config();
    let result = train(&ansatz, &task, &tcfg)?;
    let desc = format!(
        "hardware-efficient ansatz: {} qubits, {} layers, seed {}",
        cfg.ansatz.qubits,
        cfg.ansatz.layers,
        cfg.ansatz_seed()
    );
    let model = result.to_model(&desc, cfg.ansatz.qubits, tcfg.beta);
    write_text(
        &cfg.out.join("model.json"),
        &serde_json::to_string_pretty(&model)?,
    )?;
    write_text(&cfg.out.join("train_trace.csv"), &trace_csv(&result.trace))?;
    println!(
        "trained {} parameters in {} iterations: task loss {:.6}, schedule {} ticks",
        result.params.len(),
        tcfg.iterations,
        result.final_task_loss,
        result.duration_dt
    );
    if let TaskConfig::Classify { .. } = cfg.task {
        let bound = trained_circuit(cfg, &model)?;
        println!("training-set accuracy {:.3}", task.accuracy(&bound)?);
    }
    println!("wrote {} and train_trace.csv", cfg.out.join("model.json").display());
    Ok(())
}

// -------------------------------------------------------------------- lut

pub fn cmd_lut(cfg: &PipelineConfig) -> Result<()> {
    let dev = load_device(&cfg.device)?;
    let pairs = dev.coupling_pairs();
    let (n1, n2, shots) = (cfg.lut.n1(), cfg.lut.n2(), cfg.lut.shots());
    let lut = build_lut(&dev, &pairs, n1, n2, shots, cfg.lut_seed())?;
    write_text(&cfg.out.join("lut.json"), &lut.to_json()?)?;
    println!(
        "built error table: {} pairs x {n1} angles x {n2} stretches = {} benchmark executions at {shots} shots",
        pairs.len(),
        lut.executions()
    );
    for entry in lut.entries() {
        match entry {
            LutEntry::Fit(fit) => println!(
                "  pair ({}, {}): k1 {:.4}  k2 {:.4}  b {:.4}  residual rms {:.5}",
                fit.control, fit.target, fit.k1, fit.k2, fit.b, fit.residual_rms
            ),
            LutEntry::Failed {
                control,
                target,
                error,
            } => println!("  pair ({control}, {target}): fit failed: {error}"),
        }
    }
    println!("wrote {}", cfg.out.join("lut.json").display());
    Ok(())
}

// -------------------------------------------------------------- calibrate

pub fn cmd_calibrate(cfg: &PipelineConfig) -> Result<()> {
    let dev = load_device(&cfg.device)?;
    let model = read_model(cfg)?;
    let circuit = trained_circuit(cfg, &model)?;
    let lut = read_lut(cfg)?;
    let calibration = calibrate(&circuit, &lut, &dev, &cfg.calib_config())?;
    write_text(&cfg.out.join("calibration.json"), &calibration.to_json()?)?;
    write_text(&cfg.out.join("calib_trace.csv"), &calibration.trace_csv())?;
    println!(
        "calibrated {} coupling pairs: loss {:.6} (unit assignment scores 1 + alpha * error)",
        circuit.two_qubit_pairs().len(),
        calibration.best_loss
    );
    for (pair, dsr) in circuit.two_qubit_pairs().into_iter().filter_map(|p| {
        calibration.assignment.get(p).map(|d| (p, d))
    }) {
        println!("  pair ({}, {}): stretch {:.4}", pair.0, pair.1, dsr.value());
    }
    println!(
        "wrote {} and calib_trace.csv",
        cfg.out.join("calibration.json").display()
    );
    Ok(())
}

// -------------------------------------------------------------------- run

/// Everything one execution produces, persisted as `run.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub shots: u64,
    pub seed: u64,
    /// Stretch assignment the schedule was compiled with.
    pub dsr: DsrAssignment,
    pub duration_dt: u64,
    pub duration_us: f64,
    pub clock_days: f64,
    /// Output-distribution closeness to the ideal simulation (1 - total
    /// variation distance).
    pub fidelity_vs_ideal: f64,
    /// Device-side lower bound: fraction of error-free trajectories.
    pub fidelity_estimate: f64,
    /// Ising energy estimate from counts, with its noiseless reference
    /// (ground-state tasks only).
    pub energy: Option<EnergyReport>,
    pub counts: std::collections::BTreeMap<String, u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    pub estimate: f64,
    pub noiseless: f64,
}

pub fn cmd_run(
    cfg: &PipelineConfig,
    calibration: Option<PathBuf>,
    uniform_dsr: Option<f64>,
    shots_flag: Option<u64>,
) -> Result<()> {
    let dev = load_device(&cfg.device)?;
    let model = read_model(cfg)?;
    let circuit = trained_circuit(cfg, &model)?;
    let pairs = circuit.two_qubit_pairs();
    let assignment = match calibration {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                Error::Configuration(format!(
                    "cannot read calibration {}: {e}",
                    path.display()
                ))
            })?;
            Calibration::from_json(&text)?.assignment
        }
        None => DsrAssignment::uniform(
            pairs.iter().copied(),
            Dsr::new(uniform_dsr.unwrap_or(1.0))?,
        ),
    };
    let shots = shots_flag.unwrap_or_else(|| cfg.shots());
    let seed = cfg.seed();

    let ideal = simulate(&circuit)?.probabilities();
    let z_run = dev.execute(&compile(&with_measure(&circuit)?, &assignment, &dev)?, shots, seed)?;
    let measured = counts_to_probs(&z_run, circuit.n());
    let fidelity = fidelity_vs(&ideal, &measured);

    let energy = match build_task(cfg)? {
        TaskSpec::Vqe { observable } => {
            let x_run = dev.execute(
                &compile(&with_h_measure(&circuit)?, &assignment, &dev)?,
                shots,
                seed + 1,
            )?;
            Some(EnergyReport {
                estimate: tfim_energy(&z_run, &x_run, circuit.n()),
                noiseless: observable.expectation(&simulate(&circuit)?)?,
            })
        }
        TaskSpec::Classify { .. } => None,
    };

    let report = RunReport {
        shots,
        seed,
        dsr: assignment,
        duration_dt: z_run.duration_dt,
        duration_us: z_run.duration_us,
        clock_days: z_run.clock_days,
        fidelity_vs_ideal: fidelity,
        fidelity_estimate: z_run.fidelity_estimate,
        energy,
        counts: z_run.counts.clone(),
    };
    write_text(
        &cfg.out.join("run.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    println!(
        "executed {} shots in {} ticks ({:.3} us): fidelity vs ideal {:.4}",
        shots, report.duration_dt, report.duration_us, fidelity
    );
    if let Some(e) = &report.energy {
        println!(
            "energy estimate {:.4} (noiseless expectation {:.4})",
            e.estimate, e.noiseless
        );
    }
    println!("wrote {}", cfg.out.join("run.json").display());
    Ok(())
}

// ----------------------------------------------------------------- report

/// Which dataset `report` emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportKind {
    /// Tone duration against rotation angle for the device's first pair.
    DurationCurve,
    /// Measured benchmark outcome over the full angle-stretch grid.
    BenchmarkSurface,
    /// Executed fidelity of the trained circuit across uniform stretches.
    StretchSweep,
    /// Per-generation progress of the last calibration search.
    SearchTrace,
}

pub fn cmd_report(cfg: &PipelineConfig, kind: ReportKind) -> Result<()> {
    let (name, body) = match kind {
        ReportKind::DurationCurve => ("report_duration_curve.csv", duration_curve(cfg)?),
        ReportKind::BenchmarkSurface => ("report_benchmark_surface.csv", benchmark_surface(cfg)?),
        ReportKind::StretchSweep => ("report_stretch_sweep.csv", stretch_sweep(cfg)?),
        ReportKind::SearchTrace => ("report_search_trace.csv", search_trace(cfg)?),
    };
    let path = cfg.out.join(name);
    write_text(&path, &body)?;
    println!(
        "wrote {} ({} data rows)",
        path.display(),
        body.lines().count().saturating_sub(1)
    );
    Ok(())
}

fn first_pair(dev: &DeviceModel) -> Result<(usize, usize)> {
    dev.coupling_pairs()
        .first()
        .copied()
        .ok_or_else(|| Error::Configuration("device has no coupling pairs".into()))
}

fn duration_curve(cfg: &PipelineConfig) -> Result<String> {
    let dev = load_device(&cfg.device)?;
    let pair = first_pair(&dev)?;
    let mut out = String::from("theta_rad,duration_ticks\n");
    for k in -50..=50i64 {
        let theta = k as f64 * std::f64::consts::PI / 50.0;
        let ticks = rzx_duration_ticks(Angle::new(theta), pair, Dsr::ONE, &dev)?;
        out.push_str(&format!("{theta},{ticks}\n"));
    }
    Ok(out)
}

fn benchmark_surface(cfg: &PipelineConfig) -> Result<String> {
    let dev = load_device(&cfg.device)?;
    let pair = first_pair(&dev)?;
    let shots = cfg.lut.shots();
    let mut out = String::from("theta_rad,dsr,p00\n");
    let mut index = 0u64;
    for &theta in &theta_grid(cfg.lut.n1())? {
        for &dsr in &dsr_grid(cfg.lut.n2())? {
            let seed = cfg.lut_seed().wrapping_add(index);
            let p00 = dev.benchmark_rzx(pair, Angle::new(theta), dsr, shots, seed)?;
            out.push_str(&format!("{theta},{},{p00}\n", dsr.value()));
            index += 1;
        }
    }
    Ok(out)
}

fn stretch_sweep(cfg: &PipelineConfig) -> Result<String> {
    let dev = load_device(&cfg.device)?;
    let model = read_model(cfg)?;
    let circuit = trained_circuit(cfg, &model)?;
    let meas = with_measure(&circuit)?;
    let pairs = circuit.two_qubit_pairs();
    let ideal = simulate(&circuit)?.probabilities();
    let shots = cfg.shots();
    let mut out = String::from("dsr,fidelity\n");
    for j in 0..10 {
        let dsr = Dsr::new((6 + j) as f64 / 10.0)?;
        let assignment = DsrAssignment::uniform(pairs.iter().copied(), dsr);
        let run = dev.execute(
            &compile(&meas, &assignment, &dev)?,
            shots,
            cfg.seed() + j as u64,
        )?;
        let fid = fidelity_vs(&ideal, &counts_to_probs(&run, circuit.n()));
        out.push_str(&format!("{},{fid}\n", dsr.value()));
    }
    Ok(out)
}

fn search_trace(cfg: &PipelineConfig) -> Result<String> {
    let path = cfg.out.join("calibration.json");
    let text = fs::read_to_string(&path).map_err(|e| {
        Error::Configuration(format!(
            "cannot read calibration {} (run `calibrate` first): {e}",
            path.display()
        ))
    })?;
    Ok(Calibration::from_json(&text)?.trace_csv())
}
