//! `bbqram`: build and inspect QRAM circuits, verify gates, run the engines
//! and the seeded experiments.
//!
//! Exit status: 0 on success, 2 on configuration errors, 3 when results were
//! written but some rows are statistically weak, 1 otherwise.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{effective_config, CommandName, RunOpts};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Raised after results are written when the statistics do not support them.
#[derive(Debug)]
struct WeakStatistics;

#[derive(Parser)]
#[command(name = "bbqram", version, about = "Bucket-brigade QRAM simulator and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the query circuit, one gate per line.
    Build(RunOpts),
    /// CZ count and depth under the optimized and baseline decompositions.
    Stats(RunOpts),
    /// Check the routing unitaries and bundled circuits, and compare noise
    /// booking schemes on small probes.
    VerifyGates(RunOpts),
    /// One query: exact when noiseless, Monte Carlo otherwise.
    Simulate(RunOpts),
    /// Unmitigated infidelity against tree depth, with a log-log fit.
    Scaling(RunOpts),
    /// Post-selection sweep over K.
    Mitigate(RunOpts),
    /// Fidelity against a targeted depolarizing injection per node.
    Inject(RunOpts),
    /// Router entropy by layer after address loading.
    Entropy(RunOpts),
    /// Threshold gate error per target fidelity and depth.
    Contour(RunOpts),
    /// Single-qubit teleportation of the cardinal states.
    Teleport(RunOpts),
    /// Undo per-qubit readout error on a histogram.
    ReadoutCorrect(RunOpts),
}

impl Command {
    fn split(self) -> (CommandName, RunOpts) {
        match self {
            Command::Build(o) => (CommandName::Build, o),
            Command::Stats(o) => (CommandName::Stats, o),
            Command::VerifyGates(o) => (CommandName::VerifyGates, o),
            Command::Simulate(o) => (CommandName::Simulate, o),
            Command::Scaling(o) => (CommandName::Scaling, o),
            Command::Mitigate(o) => (CommandName::Mitigate, o),
            Command::Inject(o) => (CommandName::Inject, o),
            Command::Entropy(o) => (CommandName::Entropy, o),
            Command::Contour(o) => (CommandName::Contour, o),
            Command::Teleport(o) => (CommandName::Teleport, o),
            Command::ReadoutCorrect(o) => (CommandName::ReadoutCorrect, o),
        }
    }
}

fn execute(cmd: CommandName, opts: RunOpts) -> anyhow::Result<()> {
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(ConfigError("threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let doc = effective_config(cmd, &opts)?;
    if let Some(path) = &opts.dump_config {
        std::fs::write(path, doc.dump())
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    }
    let outcome = commands::run(cmd, &doc, &opts.out_dir)?;
    if !outcome.weak.is_empty() {
        for w in &outcome.weak {
            eprintln!("warning: {w}");
        }
        return Err(anyhow::Error::msg("statistically weak rows; increase --samples").context(WeakStatistics));
    }
    Ok(())
}

impl std::fmt::Display for WeakStatistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("results written with statistical warnings")
    }
}

fn exit_status(e: &anyhow::Error) -> u8 {
    use bbqram::Error as E;
    if e.downcast_ref::<WeakStatistics>().is_some() {
        return 3;
    }
    for cause in e.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::SizeMismatch(_)
                | E::InvalidAddress(_)
                | E::InvalidData(_)
                | E::Parse { .. }
                | E::UnknownConnectivity { .. }
                | E::InvalidParameter(_)
                | E::OperandOutOfRange { .. }
                | E::WrongDimension { .. }
                | E::Singular(_)
                | E::Io(_) => 2,
                E::AllRejected | E::NotBracketed { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let (cmd, opts) = Cli::parse().command.split();
    match execute(cmd, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
