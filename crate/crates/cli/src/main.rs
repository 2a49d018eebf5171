use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use flatfront_cli::{output_dir, run, CliError, Command, JobConfig};

/// Flat fronts in H^3 and S^3_1 from Weierstrass data.
#[derive(Parser)]
#[command(name = "flatfront", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Job configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "FLATFRONT_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("flatfront: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cfg = JobConfig::load(&cli.config)?;
    let job = cfg.resolve()?;
    let out = output_dir(cli.out_dir.as_deref(), &cfg, &cli.config);
    run(cli.command, &job, &out)
}
