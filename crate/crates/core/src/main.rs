use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use emsim::cli::{self, CliError, HopSelector, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "emsim", version, about = "Three-hop D2D relay chain energy-efficiency simulator")]
struct Args {
    /// Scenario configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; defaults to a name under the configured output dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for topology placement and fading.
    #[arg(long, global = true, env = "EMSIM_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// EE versus distance for one hop or for the full chain.
    Sweep {
        #[arg(long, default_value = "1")]
        hop: HopSelector,
    },
    /// Optimal-relay chain versus lowest-score-relay chain.
    Compare,
    /// Export the generated topology and the election outcome.
    Topology,
    /// Parse and validate the configuration only.
    Validate {
        /// Print the effective configuration with defaults filled in.
        #[arg(long)]
        print_config: bool,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => cli::load_config(path)?,
        None => ScenarioConfig::default(),
    };
    let seed = args.seed.unwrap_or(config.seed);
    match args.command {
        Command::Sweep { hop } => {
            let csv = cli::sweep_csv(&config, hop, seed)?;
            let out = args.out.unwrap_or_else(|| cli::default_sweep_path(&config, hop));
            cli::write_atomic(&out, &csv)
        }
        Command::Compare => {
            let csv = cli::compare_csv(&config, seed)?;
            let out = args.out.unwrap_or_else(|| cli::default_compare_path(&config));
            cli::write_atomic(&out, &csv)
        }
        Command::Topology => {
            let json = cli::topology_json(&config, seed)?;
            let out = args.out.unwrap_or_else(|| cli::default_topology_path(&config));
            cli::write_atomic(&out, &json)
        }
        Command::Validate { print_config } => {
            if print_config {
                let text = config.to_json();
                match args.out {
                    Some(out) => cli::write_atomic(&out, &text)?,
                    None => print!("{text}"),
                }
            } else {
                println!("ok");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
