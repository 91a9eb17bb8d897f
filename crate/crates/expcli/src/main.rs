use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use toepblock_exp::config::Task;
use toepblock_exp::runner::manifest_path;
use toepblock_exp::{builtin, emit_plotdata, load_config, run_experiment, ConfigError, ExperimentConfig, RunManifest, BUILTIN};

const EXIT_VALIDATION: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "toepblock-exp", version, about = "Run block Toeplitz spectral distribution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep η and write value files plus manifest.json.
    Run {
        /// Config file, or builtin:<name>.
        config: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Comma-separated subset of the config's tasks.
        #[arg(long, value_delimiter = ',')]
        tasks: Vec<String>,
        /// Override the η sweep (comma-separated).
        #[arg(long, value_delimiter = ',')]
        eta: Vec<usize>,
    },
    /// Parse and validate a config without running it.
    Validate { config: String },
    /// List bundled configs.
    ListBuiltin,
    /// Write plot data for one task (e.g. eig-compare) of a finished run.
    Plot {
        /// manifest.json or the run directory.
        manifest: PathBuf,
        figure: String,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

fn load(spec: &str) -> Result<ExperimentConfig, ConfigError> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name).unwrap_or_else(|| {
            Err(ConfigError::Validation {
                path: "config".into(),
                message: format!("no builtin config '{name}'"),
            })
        }),
        None => load_config(Path::new(spec)),
    }
}

fn select(cfg: ExperimentConfig, tasks: &[String], eta: Vec<usize>) -> Result<ExperimentConfig, String> {
    let cfg = if eta.is_empty() { cfg } else { cfg.with_eta(eta).map_err(|e| e.to_string())? };
    if tasks.is_empty() {
        return Ok(cfg);
    }
    let mut chosen = Vec::new();
    for t in tasks {
        let task: Task = t.parse()?;
        if !cfg.tasks.contains(&task) {
            return Err(format!("task '{task}' is not enabled in config '{}'", cfg.name));
        }
        chosen.push(task);
    }
    Ok(cfg.with_tasks(chosen))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            tasks,
            eta,
        } => {
            let cfg = match load(&config).map_err(|e| e.to_string()).and_then(|c| select(c, &tasks, eta)) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            match run_experiment(&cfg, &out, workers) {
                Ok(manifest) => {
                    for e in manifest.failures() {
                        eprintln!("failed: eta={} {}: {}", e.eta, e.task, e.error.as_deref().unwrap_or(""));
                    }
                    println!("{}", out.join(toepblock_exp::runner::MANIFEST_FILE).display());
                    if manifest.partial {
                        ExitCode::from(EXIT_FAILURE)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                let tasks: Vec<String> = cfg.tasks.iter().map(Task::to_string).collect();
                println!(
                    "{}: nu={} F {}x{} eta={:?} tasks={}",
                    cfg.name,
                    cfg.structure.nu(),
                    cfg.distribution_symbol.rows(),
                    cfg.distribution_symbol.cols(),
                    cfg.eta,
                    tasks.join(",")
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_VALIDATION)
            }
        },
        Command::ListBuiltin => {
            for (name, _) in BUILTIN {
                let description = builtin(name).and_then(Result::ok).map(|c| c.description).unwrap_or_default();
                println!("{name:18} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Plot { manifest, figure, out } => {
            let path = manifest_path(&manifest);
            let result = RunManifest::load(&path).map_err(|e| e.to_string()).and_then(|m| {
                let dir = path.parent().unwrap_or(Path::new("."));
                emit_plotdata(&m, dir, &figure, &out).map_err(|e| e.to_string())
            });
            match result {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
    }
}
