use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tclprep::config::{self, RunOptions};

/// Second-order time-local master equation runs: factorized, switched-on and
/// prepared initial conditions.
#[derive(Parser, Debug)]
#[command(name = "tclprep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every scenario (and sweep point) of a config or manifest.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        output: Option<PathBuf>,
        /// `key=value` applied to the config tree, e.g. `bath.cutoff_over_omega=200`
        /// or `scenario.<name>.<key>=value`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Time step in units of 1/Ω.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time in units of 1/Ω.
        #[arg(long = "t-max")]
        t_max: Option<f64>,
        /// Also write α(t) and α̃(ω) tables.
        #[arg(long)]
        dump_alpha: bool,
        /// Also write the coefficient (A◇L)(t) at every stored time.
        #[arg(long)]
        dump_coefficients: bool,
        /// Reserved; no stochastic paths exist.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            overrides,
            dt,
            t_max,
            dump_alpha,
            dump_coefficients,
            seed,
        } => {
            let options = RunOptions {
                output,
                overrides,
                dt,
                t_max,
                dump_alpha,
                dump_coefficients,
                seed,
            };
            match config::run(&config, &options) {
                Ok(report) => {
                    for f in &report.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    let mut source = std::error::Error::source(&e);
                    while let Some(s) = source {
                        eprintln!("  caused by: {s}");
                        source = s.source();
                    }
                    ExitCode::FAILURE
                }
            }
        }
    }
}
