use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kamlab::cli::{builtin, parse_config, parse_config_file, resolve_output_dir, run_scenario, ConfigErrors, ScenarioConfig, BUILTINS};

#[derive(Parser)]
#[command(name = "kamlab", version, about = "Discrete weak KAM scenarios on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in with --builtin.
    Run {
        config: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Parse and validate a scenario file without running it.
    Validate { config: PathBuf },
    /// List the built-in scenarios.
    ListBuiltins,
}

fn load(config: Option<PathBuf>, name: Option<String>) -> Result<ScenarioConfig, String> {
    let parsed: Result<ScenarioConfig, ConfigErrors> = match (config, name) {
        (Some(_), Some(_)) => return Err("give either a config path or --builtin, not both".into()),
        (None, None) => return Err("missing config path (or --builtin <name>)".into()),
        (None, Some(name)) => match builtin(&name) {
            Some(text) => parse_config(text),
            None => return Err(format!("unknown built-in {name:?}; see `kamlab list-builtins`")),
        },
        (Some(path), None) => {
            if !path.exists() {
                if let Some(text) = path.to_str().and_then(builtin) {
                    return parse_config(text).map_err(|e| e.to_string());
                }
            }
            parse_config_file(&path)
        }
    };
    parsed.map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListBuiltins => {
            for (name, summary, _) in BUILTINS {
                println!("{name:<26} {summary}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match parse_config_file(&config) {
            Ok(c) => {
                println!("ok: {} ({}D, n = {}, model {})", c.name, c.dim, c.n, c.model.name);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
        Command::Run { config, builtin } => {
            let config = match load(config, builtin) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            let dir = resolve_output_dir(&config);
            match run_scenario(&config, &dir) {
                Ok(report) => {
                    for c in report.failures() {
                        eprintln!("FAIL [{}] {}: {}", c.stage, c.name, c.detail);
                    }
                    for (family, verdict) in &report.verdicts {
                        println!("{family}: {verdict}");
                    }
                    println!(
                        "{}: {} invariants, {} failed; report in {}",
                        report.scenario,
                        report.checks.len(),
                        report.failures().len(),
                        dir.join("report.txt").display()
                    );
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
