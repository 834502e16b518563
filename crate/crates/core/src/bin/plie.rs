use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plie::report::{emit_report, Format};
use plie::scenario::{effective_tolerances, resolve_scenario, BUILTIN, TOLERANCE_ENV};
use plie::suites::{run_suite, RunOptions, Suite};

#[derive(Parser)]
#[command(
    name = "plie",
    version,
    about = "Numerical verification of Poisson-Lie constructions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite on a scenario file or built-in scenario name.
    Verify {
        scenario: String,
        #[arg(long)]
        suite: Suite,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "json")]
        format: Format,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Finite-difference step, applied after the environment profile.
        #[arg(long)]
        fd_step: Option<f64>,
        /// Treat numerically unstable rank decisions as failures.
        #[arg(long)]
        strict: bool,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// List built-in scenarios and suites.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            println!("scenarios:");
            for (name, _) in BUILTIN {
                println!("  {name}");
            }
            println!("suites:");
            for s in Suite::ALL {
                println!("  {s}");
            }
            ExitCode::SUCCESS
        }
        Command::Verify {
            scenario,
            suite,
            seed,
            format,
            out,
            fd_step,
            strict,
            timing,
        } => {
            let result = (|| {
                let mut sc = resolve_scenario(&scenario)?;
                if let Some(s) = seed {
                    sc.set_seed(s);
                }
                let env = std::env::var(TOLERANCE_ENV).ok();
                let cfg = effective_tolerances(&sc, env.as_deref(), fd_step)?;
                let opts = RunOptions {
                    cfg: Some(cfg),
                    strict,
                    timing,
                };
                let report = run_suite(&sc, suite, &opts)?;
                let text = emit_report(&report, format, out.as_deref())?;
                Ok::<_, plie::Error>((report.all_pass(), text))
            })();
            match result {
                Ok((pass, text)) => {
                    print!("{text}");
                    if pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
