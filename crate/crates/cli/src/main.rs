use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use comb_attack::Backend;
use comb_attack_cli::commands::{self, AttackOptions};
use comb_attack_cli::CliError;

#[derive(Parser)]
#[command(
    name = "comb-attack",
    version,
    about = "Simulate and attack LFSR combination generators"
)]
struct Cli {
    /// Worker threads; 1 selects the sequential path.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write keystream bits for a key.
    Gen {
        spec: PathBuf,
        /// Full state as hex; LFSR 0 occupies the low bits.
        #[arg(long)]
        key: String,
        #[arg(long)]
        nbits: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Search weight-4 multiples of a group's feedback product.
    Multiples {
        spec: PathBuf,
        /// LFSR indices, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        group: Vec<usize>,
        #[arg(long)]
        max_degree: u64,
        /// Defaults to the cache directory.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Plan and run the staged attack.
    Attack {
        spec: PathBuf,
        keystream: Option<PathBuf>,
        /// Stage order as LFSR indices, comma separated.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Multiple cache files.
        #[arg(long = "cache")]
        caches: Vec<PathBuf>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        top_k: usize,
        #[arg(long, default_value_t = 0)]
        split_bits: usize,
        #[arg(long)]
        plan_only: bool,
    },
    /// Spectral report for a truth-table file.
    Analyze { table: PathBuf },
    /// Cross-check the probability spectrum and bounds on random functions.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// All balanced functions instead of random ones.
        #[arg(long)]
        exhaustive: bool,
    },
}

fn backend(threads: Option<usize>) -> Result<Backend, CliError> {
    match threads {
        Some(0) => Err(CliError::validation("--threads must be at least 1")),
        Some(1) => Ok(Backend::Sequential),
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::validation(e.to_string()))?;
            Ok(Backend::default())
        }
        None => Ok(Backend::default()),
    }
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let backend = backend(cli.threads)?;
    let text = match cli.command {
        Command::Gen {
            spec,
            key,
            nbits,
            out,
        } => commands::cmd_gen(&spec, &key, nbits, &out, backend)?,
        Command::Multiples {
            spec,
            group,
            max_degree,
            out,
        } => commands::cmd_multiples(&spec, &group, max_degree, out.as_deref(), backend)?,
        Command::Attack {
            spec,
            keystream,
            order,
            caches,
            cache_dir,
            top_k,
            split_bits,
            plan_only,
        } => commands::cmd_attack(&AttackOptions {
            spec,
            keystream,
            order,
            caches,
            cache_dir: cache_dir.or_else(commands::cache_dir_from_env),
            top_k,
            split_bits,
            plan_only,
            backend,
        })?,
        Command::Analyze { table } => commands::cmd_analyze(&table)?,
        Command::Verify {
            n,
            trials,
            seed,
            exhaustive,
        } => return commands::cmd_verify(n, trials, seed, exhaustive),
    };
    Ok((text, true))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
