//! `stabtel` — decide, synthesize, and verify perfect many-to-one
//! teleportation protocols over shared qudit stabilizer states.

use clap::{Parser, Subcommand, ValueEnum};
use stabtel::cli::{
    self, CliError, SimulateOptions, cmd_check, cmd_simulate, cmd_synthesize,
    render_check_report, render_simulate_report,
};
use stabtel::dense::{SimConfig, SimMode};
use stabtel::problem::{DEMO_NAMES, demo_problem, parse_problem};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "stabtel",
    about = "Qudit stabilizer teleportation: capacity analysis, protocol synthesis, dense verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enumerate,
    Sample,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a problem file and report achievable capacities.
    Check {
        /// Problem file (JSON or text form).
        #[arg(long)]
        input: PathBuf,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Synthesize a teleportation protocol and write it to a file.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        /// Output path for the protocol JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
        /// Maximum dense dimension the toolchain will materialize.
        #[arg(long, default_value_t = 1 << 13)]
        budget: usize,
    },
    /// Execute a protocol (or a problem, synthesizing on the fly) on
    /// seeded random inputs and score recovery.
    Simulate {
        /// Problem or protocol file.
        #[arg(long)]
        input: PathBuf,
        /// Number of random input tuples.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Outcome handling; the default enumerates when the outcome count
        /// is small enough and samples otherwise.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Sampled outcome count per trial in sample mode.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Print the full per-outcome table.
        #[arg(long)]
        verbose: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1 << 13)]
        budget: usize,
    },
    /// Run one of the built-in cases end to end: check, synthesize,
    /// simulate.
    Demo {
        /// One of: example1, example2, example3a, example3b.
        case: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// Optionally save the synthesized protocol.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { input, json } => {
            let text = std::fs::read_to_string(&input)?;
            let spec = parse_problem(&text)?;
            let report = cmd_check(&spec)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{}", render_check_report(&report));
            }
            Ok(0)
        }
        Command::Synthesize {
            input,
            out,
            json,
            budget,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let spec = parse_problem(&text)?;
            let (_, protocol, serialized) = cmd_synthesize(&spec, budget)?;
            std::fs::write(&out, &serialized)?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "written": out,
                        "capacities": protocol.capacities,
                        "outcomes": (protocol.dim as u128).pow(2 * protocol.total_capacity() as u32),
                    })
                );
            } else {
                println!(
                    "protocol with capacities {:?} ({} outcomes) written to {}",
                    protocol.capacities,
                    (protocol.dim as u128).pow(2 * protocol.total_capacity() as u32),
                    out.display()
                );
            }
            Ok(0)
        }
        Command::Simulate {
            input,
            trials,
            seed,
            mode,
            samples,
            verbose,
            json,
            budget,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let opts = SimulateOptions {
                trials,
                seed,
                mode: mode.map(|m| match m {
                    ModeArg::Enumerate => SimMode::Enumerate,
                    ModeArg::Sample => SimMode::Sample {
                        count: samples,
                        seed,
                    },
                }),
                samples,
                config: SimConfig {
                    max_dim: budget,
                    ..SimConfig::default()
                },
            };
            let report = cmd_simulate(&text, &opts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{}", render_simulate_report(&report, verbose));
            }
            Ok(if report.perfect() { 0 } else { 3 })
        }
        Command::Demo {
            case,
            seed,
            trials,
            out,
            json,
        } => {
            let Some(spec) = demo_problem(&case) else {
                return Err(CliError::Usage(format!(
                    "unknown demo '{case}'; available: {}",
                    DEMO_NAMES.join(", ")
                )));
            };
            let check = cmd_check(&spec)?;
            let (group, protocol, serialized) = cmd_synthesize(&spec, 1 << 13)?;
            if let Some(path) = &out {
                std::fs::write(path, &serialized)?;
            }
            let opts = SimulateOptions {
                trials,
                seed,
                mode: None,
                samples: 50,
                config: SimConfig::default(),
            };
            let report = cli::simulate_protocol(&group, &protocol, None, &opts)?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "case": case,
                        "check": check,
                        "simulation": report,
                    })
                );
            } else {
                print!("{}", render_check_report(&check));
                print!("{}", render_simulate_report(&report, false));
            }
            Ok(if report.perfect() { 0 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
