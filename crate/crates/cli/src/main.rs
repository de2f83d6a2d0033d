use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use symred_cli::config::{self, Mode};
use symred_cli::{campaign, report, CliError};

#[derive(Parser)]
#[command(
    name = "symred",
    about = "Verification campaigns and simulators for reduced Poisson structures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification campaign.
    Verify {
        kind: VerifyKind,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a simulation scenario.
    Simulate {
        kind: SimulateKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render pass/fail tables from report.json artifacts.
    Report { artifacts: Vec<PathBuf> },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Jacobi,
    Bianchi,
    MinimalCoupling,
    Reduction,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimulateKind {
    Particle,
    Maxwell,
}

fn expected_mode(cmd: &Command) -> Option<Mode> {
    match cmd {
        Command::Verify { kind, .. } => Some(match kind {
            VerifyKind::Jacobi => Mode::VerifyJacobi,
            VerifyKind::Bianchi => Mode::VerifyBianchi,
            VerifyKind::MinimalCoupling => Mode::VerifyMinimalCoupling,
            VerifyKind::Reduction => Mode::VerifyReduction,
        }),
        Command::Simulate { kind, .. } => Some(match kind {
            SimulateKind::Particle => Mode::SimulateParticle,
            SimulateKind::Maxwell => Mode::SimulateMaxwell,
        }),
        Command::Report { .. } => None,
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Report { artifacts } => {
            let text = report::render(artifacts)?;
            print!("{text}");
            Ok(true)
        }
        Command::Verify {
            config: path,
            out,
            seed,
            ..
        }
        | Command::Simulate {
            config: path,
            out,
            seed,
            ..
        } => {
            let mut cfg = config::load(path)?;
            let expected = expected_mode(&cli.command).expect("run subcommand");
            if cfg.mode != expected {
                return Err(CliError::Config(format!(
                    "config mode \"{}\" does not match the \"{}\" subcommand",
                    cfg.mode.as_str(),
                    expected.as_str()
                )));
            }
            if let Some(seed) = seed {
                cfg.seed = *seed;
            }
            let out_dir = out
                .clone()
                .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("artifacts"));
            let report = campaign::run(&cfg, &out_dir)?;
            for check in &report.checks {
                println!(
                    "{}: {} = {:.4e} ({} {:.1e})",
                    if check.pass { "pass" } else { "FAIL" },
                    check.name,
                    check.value,
                    check.comparison,
                    check.tolerance
                );
            }
            println!(
                "{}: {} -> {}",
                report.mode,
                if report.pass { "PASS" } else { "FAIL" },
                out_dir.display()
            );
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SYMRED_LOG")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
