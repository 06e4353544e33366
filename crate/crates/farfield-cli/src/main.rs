//! Thin command-line front end over the `farfield` library.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data or file
//! error, 4 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use farfield::attack::AttackMethod;
use farfield::config::RunConfig;
use farfield::runner::{
    cmd_attack, cmd_export, cmd_matrix, cmd_sweep, cmd_train, AttackOptions, ExportOptions,
    SweepKind,
};
use farfield::Error;

#[derive(Parser)]
#[command(
    name = "farfield",
    about = "Generate and evaluate far-field adversarial examples",
    version
)]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config's worker-thread count (0 = all cores).
    /// Outputs do not depend on this setting.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Record per-iteration traces in single-attack results.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the model suite and write model files plus a manifest.
    Train,
    /// Attack one test example and write images plus a JSON result.
    Attack {
        /// Model name from the config.
        #[arg(long)]
        model: String,
        /// Index into the test split.
        #[arg(long)]
        index: usize,
        /// Attack method (defaults to the config's).
        #[arg(long)]
        method: Option<String>,
    },
    /// Build the white-box/black-box transfer matrix.
    Matrix,
    /// Run a hyperparameter sweep.
    Sweep {
        /// Which parameter to sweep: perturbation, iterations or decay.
        which: String,
    },
    /// Export qualitative image panels across a swept parameter.
    Export {
        /// Model name from the config.
        #[arg(long)]
        model: String,
        /// Test-split example indices.
        #[arg(long, value_delimiter = ',')]
        indices: Vec<usize>,
        /// Attack method (defaults to the config's).
        #[arg(long)]
        method: Option<String>,
        /// Swept parameter: perturbation, iterations or decay.
        #[arg(long, default_value = "perturbation")]
        param: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) => 2,
        Error::Io(_) | Error::Format(_) | Error::InsufficientPool { .. }
        | Error::FingerprintMismatch { .. } => 3,
        Error::ShapeMismatch { .. } => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let config_path = cli
        .config
        .ok_or_else(|| Error::Config("a --config file is required".into()))?;
    let mut config = RunConfig::load(&config_path)?;
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(out) = cli.out {
        config.run.out_dir = out;
    }
    if let Some(jobs) = cli.jobs {
        config.run.jobs = jobs;
    }
    if cli.trace {
        config.run.trace = true;
    }

    match cli.command {
        Command::Train => {
            let outcome = cmd_train(&config)?;
            println!("wrote {}", outcome.manifest_path.display());
            for record in &outcome.manifest.models {
                println!(
                    "  {}: arch {} epochs {} train {:.4} test {}",
                    record.name,
                    record.arch,
                    record.epochs_run,
                    record.train_accuracy,
                    record
                        .test_accuracy
                        .map_or("n/a".to_string(), |a| format!("{a:.4}")),
                );
            }
        }
        Command::Attack { model, index, method } => {
            let method = method.map(|m| AttackMethod::parse(&m)).transpose()?;
            let outcome = cmd_attack(&config, &AttackOptions { model, index, method })?;
            println!("wrote {}", outcome.json_path.display());
            println!("  original:    {}", outcome.original_pgm.display());
            println!("  adversarial: {}", outcome.adversarial_pgm.display());
            let r = &outcome.result;
            println!(
                "  iterations {} distance L2 {:.2} Linf {:.2} prediction {} -> {}",
                r.iterations_used,
                r.distance_l2,
                r.distance_linf,
                r.original_prediction,
                r.adversarial_prediction
            );
        }
        Command::Matrix => {
            let paths = cmd_matrix(&config)?;
            println!("wrote {}", paths.csv.display());
            println!("wrote {}", paths.summary.display());
            print!("{}", std::fs::read_to_string(&paths.summary)?);
        }
        Command::Sweep { which } => {
            let kind = SweepKind::parse(&which)?;
            let paths = cmd_sweep(&config, kind)?;
            println!("wrote {}", paths.csv.display());
            println!("wrote {}", paths.summary.display());
        }
        Command::Export { model, indices, method, param } => {
            let method = method.map(|m| AttackMethod::parse(&m)).transpose()?;
            let kind = SweepKind::parse(&param)?;
            let files = cmd_export(&config, &ExportOptions { model, indices, method, kind })?;
            for f in &files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}
