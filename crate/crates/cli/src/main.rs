//! `motsim`: baseline characterization, de-tangled mesh detection, PLC link
//! metrics and hybrid network tables.
//!
//! Exit codes: 0 clean, 2 anomaly found (`detect`), 1 error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use motsim::plc::{PdrMode, QMode};

use commands::DetectInput;
use config::{node_list, ExperimentConfig};

#[derive(Parser)]
#[command(name = "motsim", version, about = "Hybrid BLE-mesh / PLC reliability, latency and anomaly experiments")]
struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario preset of the mesh.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=3))]
    scenario: Option<u8>,
    /// Nodes removed together, e.g. `S3,S5`. Repeat for more cases.
    #[arg(long, global = true)]
    detangle: Vec<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pdr_mode: Option<PdrModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PdrModeArg {
    AllBitsLost,
    PerBit,
}

#[derive(Clone, Copy, ValueEnum)]
enum QModeArg {
    GaussianTail,
    Erfc,
}

#[derive(Subcommand)]
enum Command {
    /// Baseline profile, latency tables and scenario comparison.
    Characterize,
    /// Check observations against a baseline profile.
    #[command(group(ArgGroup::new("input").required(true).args(["observations", "simulate_detangle", "simulate_baseline"])))]
    Detect {
        #[arg(long)]
        profile: PathBuf,
        /// CSV with `epoch,source,latency_ms,pdr` rows.
        #[arg(long)]
        observations: Option<PathBuf>,
        /// Simulate the profile's mesh with these nodes removed.
        #[arg(long)]
        simulate_detangle: Option<String>,
        /// Simulate the profile's mesh unchanged.
        #[arg(long)]
        simulate_baseline: bool,
        #[arg(long)]
        epochs: Option<u64>,
    },
    /// Gain, delay spread, SINR, BER and PDR of CFR files.
    Plc {
        #[arg(long)]
        cfr: Vec<PathBuf>,
        #[arg(long, value_enum)]
        q_mode: Option<QModeArg>,
    },
    /// Hybrid PDR and latency tables.
    Hybrid,
    /// Path-count beliefs of the client with and without a de-tangled set.
    Beliefs {
        /// Source node holding the evidence.
        #[arg(long)]
        source: Option<String>,
    },
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(n) = cli.scenario {
        cfg.set_scenario(n);
    }
    if !cli.detangle.is_empty() {
        cfg.detangle = cli.detangle.iter().map(|d| node_list(d)).collect();
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
        cfg.belief_trials = t;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(m) = cli.pdr_mode {
        cfg.plc.params.pdr_mode = match m {
            PdrModeArg::AllBitsLost => PdrMode::AllBitsLost,
            PdrModeArg::PerBit => PdrMode::PerBitIndependent,
        };
    }
    match &cli.command {
        Command::Detect { epochs: Some(e), .. } => cfg.epochs = *e,
        Command::Plc { q_mode: Some(q), .. } => {
            cfg.plc.params.q_mode = match q {
                QModeArg::GaussianTail => QMode::GaussianTail,
                QModeArg::Erfc => QMode::Erfc,
            }
        }
        Command::Beliefs { source: Some(s) } => cfg.belief_source = s.clone(),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = resolve(&cli)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker threads")?;
    }
    match cli.command {
        Command::Characterize => commands::characterize(&cfg),
        Command::Detect { profile, observations, simulate_detangle, simulate_baseline, .. } => {
            let input = match (observations, simulate_detangle) {
                (Some(p), _) => DetectInput::Observations(p),
                (None, Some(nodes)) => DetectInput::Simulate(node_list(&nodes)),
                (None, None) => {
                    debug_assert!(simulate_baseline);
                    DetectInput::Simulate(Vec::new())
                }
            };
            commands::detect_cmd(&cfg, &profile, input)
        }
        Command::Plc { cfr, .. } => commands::plc(&cfg, &cfr),
        Command::Hybrid => commands::hybrid(&cfg),
        Command::Beliefs { .. } => commands::beliefs(&cfg, cfg.belief_trials),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
