use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use umd_cli::config::{self, Overrides};
use umd_cli::error::{exit, CliError, CliResult};
use umd_cli::experiment;

#[derive(Parser)]
#[command(name = "umd", version, about = "Unified mirror descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first policy at the first step size of a config.
    Solve(Common),
    /// Run every (policy, step size) cell of a config.
    Sweep(Common),
    /// Run unified mirror prox on the configured operator.
    Vi(Common),
    /// Play the configured online linear game.
    Regret(Common),
    /// Run the randomized invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `run.output`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Certify every step regardless of the config.
    #[arg(long)]
    certify: bool,
    /// Overrides the data and adversary seeds.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            certify: self.certify,
            seed: self.seed,
        }
    }
}

fn with_config<T>(
    c: &Common,
    f: impl FnOnce(&config::RawConfig, &Path, &Overrides) -> CliResult<T>,
) -> CliResult<()> {
    let (raw, base) = config::load(&c.config)?;
    f(&raw, &base, &c.overrides()).map(|_| ())
}

fn selftest(seed: u64) -> CliResult<()> {
    let outcomes = umd_core::selftest::run_all(seed);
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::Cells {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG } else { exit::OK });
        }
    };
    let result = match &cli.command {
        Command::Solve(c) => with_config(c, experiment::solve),
        Command::Sweep(c) => with_config(c, experiment::sweep),
        Command::Vi(c) => with_config(c, experiment::vi),
        Command::Regret(c) => with_config(c, |raw, _, o| experiment::regret(raw, o)),
        Command::Selftest { seed } => selftest(*seed),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
