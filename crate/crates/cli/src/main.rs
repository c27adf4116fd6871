use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dephasing_cli::commands::{cmd_coefficients, cmd_decoherence_map, cmd_pointer, cmd_theorem, cmd_verify, CommandOutput};
use dephasing_cli::config::{Overrides, RunConfig};
use dephasing_cli::output::OutputDir;
use dephasing_cli::{CliError, EXIT_OK, EXIT_VALIDATION};
use dephasing_core::bath::CutoffFamily;

#[derive(Debug, Parser)]
#[command(
    name = "dephasing",
    version,
    about = "Continuous pointer states of a dephased spin chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bath coefficients a and b by every route, with the identity check.
    Coefficients {
        #[command(flatten)]
        common: Common,
        /// Report every cutoff family instead of the configured one.
        #[arg(long)]
        all_families: bool,
    },
    /// Analytic against fitted decay rates per distance from the diagonal.
    DecoherenceMap {
        #[command(flatten)]
        common: Common,
    },
    /// Convergence of expectations to the pointer limit.
    Theorem {
        #[command(flatten)]
        common: Common,
        /// Use the diagonal part of the random observable.
        #[arg(long)]
        diagonal: bool,
    },
    /// Projections with prescribed trace and their invariance.
    Pointer {
        #[command(flatten)]
        common: Common,
        /// Target traces, comma separated.
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
    },
    /// Run the acceptance suite.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    cutoff: Option<CutoffFamily>,
    #[arg(long)]
    k0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Quadrature tolerance for `coefficients`, distance tolerance for
    /// `theorem`.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn resolve(&self, tol_is_theorem: bool, s_values: Option<Vec<f64>>) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let (quadrature_tol, theorem_tol) = if tol_is_theorem { (None, self.tol) } else { (self.tol, None) };
        cfg.apply(&Overrides {
            seed: self.seed,
            n_sites: self.n_sites,
            lambda: self.lambda,
            beta: self.beta,
            cutoff: self.cutoff,
            k0: self.k0,
            p: self.p,
            quadrature_tol,
            theorem_tol,
            s_values,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn finish(output: CommandOutput, out: &std::path::Path) -> Result<(), CliError> {
    let dir = OutputDir::create(out)?;
    for path in output.write(&dir)? {
        println!("wrote {}", path.display());
    }
    output.outcome
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Coefficients { common, all_families } => {
            let cfg = common.resolve(false, None)?;
            finish(cmd_coefficients(&cfg, all_families)?, &common.out)
        }
        Command::DecoherenceMap { common } => {
            let cfg = common.resolve(false, None)?;
            finish(cmd_decoherence_map(&cfg)?, &common.out)
        }
        Command::Theorem { common, diagonal } => {
            let cfg = common.resolve(true, None)?;
            finish(cmd_theorem(&cfg, diagonal)?, &common.out)
        }
        Command::Pointer { common, s } => {
            let cfg = common.resolve(false, s)?;
            finish(cmd_pointer(&cfg)?, &common.out)
        }
        Command::Verify { common } => {
            let cfg = common.resolve(false, None)?;
            let output = cmd_verify(&cfg, |r| println!("{r}"));
            finish(output, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
