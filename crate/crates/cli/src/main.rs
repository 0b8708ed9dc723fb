//! `rbembed`: solve for a reversed barrier and check it by simulation.
//!
//! Exit status is 0 when every gate passes, 1 on a computation error or a
//! failed gate, and 2 when the command line or the config file is invalid.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Mode, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "rbembed", version, about = "Reversed-barrier Skorokhod embeddings for Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize the law and solve for the barrier; verify when the config has a `sim` section.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Simulate even without a `sim` section.
        #[arg(long)]
        verify: bool,
    },
    /// Simulate the barrier given by `barrier_input` against the law.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Solve, then compare truncated stopping-time expectations with the Azéma–Yor embedding.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config and $RBEMBED_OUT_DIR.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn fail(code: u8, kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, mode) = match cli.command {
        Command::Solve { common, verify } => (common, Mode::Solve { verify }),
        Command::Verify { common } => (common, Mode::Verify),
        Command::Compare { common } => (common, Mode::Compare),
    };
    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => return fail(2, "ConfigParse", format!("{}: {e}", common.config.display())),
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(2, "ConfigParse", e),
    };
    let ov = Overrides {
        n_paths: common.n_paths,
        seed: common.seed,
        out_dir: common.out_dir,
    };
    let simulate = match cfg.prepare(mode, &ov) {
        Ok(s) => s,
        Err(e) => return fail(2, "ConfigParse", e),
    };
    match run::run(&cfg, mode, simulate) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<&str> = summary
                    .gates
                    .iter()
                    .filter(|g| !g.passed)
                    .map(|g| g.name.as_str())
                    .collect();
                eprintln!("{}", json!({ "error": "GateFailed", "gates": failed }));
                ExitCode::from(1)
            }
        }
        Err(e) => fail(1, e.kind(), e.to_string()),
    }
}
