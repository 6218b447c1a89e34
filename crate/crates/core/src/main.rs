use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use statarb::classify::DefinitionTolerances;
use statarb::io::commands::{cmd_analytic, cmd_check, cmd_classify, cmd_portfolio, cmd_simulate};
use statarb::io::{ConfigFile, Format};

#[derive(Parser)]
#[command(name = "statarb", version, about = "Barrier strategies under GBM: closed forms, Monte Carlo, classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form limits, inverse Gaussian parameters and barrier sensitivities.
    Analytic {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo run writing estimates.csv, hist_T<h>.csv and manifest.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Adds the Brownian-bridge crossing correction to barrier monitoring.
        #[arg(long)]
        bridge_correction: bool,
        /// Worker threads; results do not depend on this.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Which barrier family, if any, is a statistical arbitrage.
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Minimum-variance weights for two strategies.
    Portfolio {
        #[arg(long)]
        sigma1: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Checks the four statistical-arbitrage conditions on an estimates.csv. Exits 4 when they fail.
    Check {
        estimates: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        loss_tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        var_rel_tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn run(cli: Cli) -> statarb::Result<ExitCode> {
    match cli.command {
        Command::Analytic { config, format } => {
            print!("{}", cmd_analytic(&ConfigFile::read(config)?, format)?);
        }
        Command::Simulate {
            config,
            out,
            seed,
            bridge_correction,
            workers,
        } => {
            let mut experiment = ConfigFile::read(config)?.experiment()?;
            if let Some(seed) = seed {
                experiment.seed = seed;
            }
            experiment.bridge_correction |= bridge_correction;
            let outcome = cmd_simulate(&experiment, &out, workers)?;
            print!("{}", outcome.summary());
            println!("wrote {}", out.display());
        }
        Command::Classify { config, format } => {
            print!("{}", cmd_classify(&ConfigFile::read(config)?.params()?, format)?);
        }
        Command::Portfolio {
            sigma1,
            sigma2,
            rho,
            format,
        } => {
            print!("{}", cmd_portfolio(sigma1, sigma2, rho, format)?);
        }
        Command::Check {
            estimates,
            loss_tol,
            var_rel_tol,
            format,
        } => {
            let tol = DefinitionTolerances {
                loss: loss_tol,
                var_rel: var_rel_tol,
            };
            let outcome = cmd_check(&estimates, &tol, format)?;
            print!("{}", outcome.rendered);
            if !outcome.passed {
                return Ok(ExitCode::from(4));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
