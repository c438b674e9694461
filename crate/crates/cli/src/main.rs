use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};
use sigma_consensus::harness::{self, HarnessError, RunConfig, RunStatus};
use sigma_consensus::scenarios::BUILTIN_NAMES;

/// Simulate delayed leaderless consensus and check its Lyapunov diagnostics.
#[derive(Parser)]
#[command(name = "sigma-consensus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace, report and plot.
    Run {
        /// TOML run config.
        config: Option<PathBuf>,
        /// Run a builtin scenario with default settings instead.
        #[arg(long, conflicts_with = "config")]
        builtin: Option<String>,
        /// Output root (overrides SIGMA_CONSENSUS_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Run several configs concurrently, each under `<root>/<config stem>`.
    Batch {
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the builtin scenario names.
    ListBuiltins,
}

fn load(path: &Path) -> Result<RunConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_toml(&text)
}

fn run_one(config: &RunConfig, root: &Path) -> RunStatus {
    match harness::run(config, root) {
        Ok(r) => {
            let summary = serde_json::json!({
                "scenario": r.report.scenario,
                "status": r.report.status,
                "exit_code": r.report.exit_code,
                "outcome": r.report.outcome.detail,
                "files": r.files,
            });
            println!("{summary}");
            r.report.status
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.status()
        }
    }
}

fn exit(status: RunStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, builtin, out } => {
            let root = out.unwrap_or_else(harness::output_root);
            let config = match (config, builtin) {
                (_, Some(name)) => Ok(RunConfig::builtin(&name)),
                (Some(path), None) => load(&path),
                (None, None) => Err(HarnessError::Parse("give a config path or --builtin".into())),
            };
            match config {
                Ok(c) => exit(run_one(&c, &root)),
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    exit(e.status())
                }
            }
        }
        Command::Validate { config } => {
            let issues = match load(&config) {
                Ok(c) => harness::validate(&c),
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    return exit(e.status());
                }
            };
            println!("{}", serde_json::to_string(&issues).expect("issues serialize"));
            if issues.is_empty() {
                exit(RunStatus::Pass)
            } else {
                exit(RunStatus::ConfigError)
            }
        }
        Command::Batch { configs, out } => {
            let root = out.unwrap_or_else(harness::output_root);
            let handles: Vec<_> = configs
                .into_iter()
                .map(|path| {
                    let root = root.join(path.file_stem().unwrap_or_default());
                    thread::spawn(move || match load(&path) {
                        Ok(c) => run_one(&c, &root),
                        Err(e) => {
                            eprintln!("{}", e.to_json());
                            e.status()
                        }
                    })
                })
                .collect();
            let worst = handles
                .into_iter()
                .map(|h| h.join().unwrap_or(RunStatus::InvariantViolation))
                .max_by_key(|s| s.code())
                .unwrap_or(RunStatus::Pass);
            exit(worst)
        }
        Command::ListBuiltins => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
