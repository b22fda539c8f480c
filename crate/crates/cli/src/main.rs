//! `qupad` — drives the whole pipeline from the shell: synthetic device
//! snapshots, duration-aware training, per-pair error tables, stretch
//! calibration, noisy execution, and figure-ready datasets.
//!
//! Exit codes: 0 success; 2 configuration, schema, or argument problems;
//! 3 numeric failures (divergence, ill-posed fits, broken internal
//! contracts, capacity); 4 infeasible calibration (amplitude saturation or
//! an empty feasible set).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::LevelFilter;
use qupad_core::Error;

use crate::commands::ReportKind;
use crate::config::PipelineConfig;

#[derive(Parser)]
#[command(
    name = "qupad",
    version,
    about = "Duration-stretch calibration pipeline on a synthetic drifting-noise device"
)]
struct Cli {
    /// Chattier diagnostics on stderr: -v info, -vv debug (default: warnings).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by every config-driven subcommand.
#[derive(Args)]
struct CommonArgs {
    /// Pipeline configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configuration's global seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configuration's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> qupad_core::Result<PipelineConfig> {
        PipelineConfig::load(&self.config, self.seed, self.out.clone())
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Create, age, or inspect synthetic device snapshots.
    Device {
        #[command(subcommand)]
        sub: DeviceCmd,
    },
    /// Train the configured ansatz for the configured task; writes
    /// model.json and train_trace.csv.
    Train(CommonArgs),
    /// Benchmark every coupling pair and fit the per-pair error table;
    /// writes lut.json.
    Lut(CommonArgs),
    /// Search per-pair duration stretches against the error table; writes
    /// calibration.json and calib_trace.csv.
    Calibrate(CommonArgs),
    /// Execute the trained circuit on the device; writes run.json with
    /// counts and a fidelity-vs-ideal summary.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the stretch assignment from this calibration file.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Use one uniform stretch ratio instead (default 1.0).
        #[arg(long, conflicts_with = "calibration")]
        uniform_dsr: Option<f64>,
        /// Override the configured execution shot count.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Emit one figure-ready CSV dataset into the output directory.
    Report {
        /// Which dataset to emit.
        #[arg(value_enum)]
        kind: ReportKind,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Subcommand)]
enum DeviceCmd {
    /// Sample a fresh device snapshot.
    New {
        /// Number of qubits on the line.
        #[arg(long)]
        qubits: usize,
        /// Snapshot seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Where to write the snapshot JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Advance a snapshot's clock, drifting its noise parameters.
    Drift {
        /// Snapshot to age.
        #[arg(long)]
        snapshot: PathBuf,
        /// How many days to advance the device clock.
        #[arg(long)]
        days: f64,
        /// Where to write the drifted snapshot (default: in place).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a snapshot's parameters.
    Show {
        /// Snapshot to inspect.
        #[arg(long)]
        snapshot: PathBuf,
    },
}

/// Map error families onto the documented exit codes.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_)
        | Error::Configuration(_)
        | Error::Schema { .. }
        | Error::Io(_)
        | Error::Json(_) => 2,
        Error::Divergence { .. }
        | Error::IllPosedFit { .. }
        | Error::Contract(_)
        | Error::Capacity(_) => 3,
        Error::AmplitudeSaturation { .. } | Error::Infeasible(_) => 4,
    }
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, record: &log::Record) {
        eprintln!(
            "{}: {}",
            record.level().as_str().to_lowercase(),
            record.args()
        );
    }
    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(level);
    }
}

fn dispatch(cmd: Cmd) -> qupad_core::Result<()> {
    match cmd {
        Cmd::Device { sub } => match sub {
            DeviceCmd::New { qubits, seed, out } => commands::device_new(qubits, seed, &out),
            DeviceCmd::Drift {
                snapshot,
                days,
                out,
            } => commands::device_drift(&snapshot, days, out),
            DeviceCmd::Show { snapshot } => commands::device_show(&snapshot),
        },
        Cmd::Train(common) => commands::cmd_train(&common.load()?),
        Cmd::Lut(common) => commands::cmd_lut(&common.load()?),
        Cmd::Calibrate(common) => commands::cmd_calibrate(&common.load()?),
        Cmd::Run {
            common,
            calibration,
            uniform_dsr,
            shots,
        } => commands::cmd_run(&common.load()?, calibration, uniform_dsr, shots),
        Cmd::Report { kind, common } => commands::cmd_report(&common.load()?, kind),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
