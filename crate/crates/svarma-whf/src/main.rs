use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use svarma_whf::config::JOBS_ENV;
use svarma_whf::{run, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "svarma-whf", version, about = "Structural VARMA estimation with Wiener-Hopf parametrised MA parts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input file of the command.
    #[arg(long, global = true)]
    data: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concurrent grid tasks (falls back to SVARMA_WHF_JOBS, then the core count).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Impulse response horizon.
    #[arg(long, global = true)]
    horizon: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Simulate a dataset from a model given in the config.
    Simulate,
    /// Fit one model by staged maximum likelihood.
    Estimate,
    /// Fit every (p, q, kappa, k) up to the configured orders and rank by BIC.
    Select,
    /// Exact Wiener-Hopf factorisation of a rational polynomial matrix.
    Whf,
    /// Rotate an estimate so that one long-run response vanishes.
    Rotate,
    /// Normality and whiteness tests on a residual file.
    Diagnose,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Estimate => Command::Estimate,
            Cmd::Select => Command::Select,
            Cmd::Whf => Command::Whf,
            Cmd::Rotate => Command::Rotate,
            Cmd::Diagnose => Command::Diagnose,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let overrides =
        Overrides { data: cli.data, out: cli.out, seed: cli.seed, jobs: cli.jobs, horizon: cli.horizon };
    let env_jobs = std::env::var(JOBS_ENV).ok();
    let outcome = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
        .and_then(|c| c.resolve(&overrides, env_jobs.as_deref()))
        .and_then(|c| run(command, &c));
    match outcome {
        Ok(paths) => {
            let outputs: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
            println!("{}", json!({ "command": command.name(), "outputs": outputs }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
