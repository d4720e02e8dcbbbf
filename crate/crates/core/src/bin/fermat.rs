use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stationary_fermat::scenario::{cmd_solve, cmd_sweep, cmd_validate, Overrides, Scenario, OUT_DIR_ENV};
use stationary_fermat::FermatError;

#[derive(Parser)]
#[command(name = "fermat", version, about = "Fixed-energy arrival-time solver for stationary Lagrangians")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (default: the scenario's `out`, then $FERMAT_OUT_DIR, then ./fermat-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Number of grid segments.
    #[arg(long, global = true, value_name = "N")]
    segments: Option<usize>,

    /// Random seed for sampling and perturbed initial paths.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    /// Suppress the printed tables.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the model assumptions and check every kappa for admissibility.
    Validate { file: PathBuf },
    /// Minimize the arrival time from every seed at a single kappa.
    Solve { file: PathBuf },
    /// Solve for each kappa of a list and write a long table.
    Sweep { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, FermatError> {
    let file = match &cli.command {
        Command::Validate { file } | Command::Solve { file } | Command::Sweep { file } => file,
    };
    let mut sc = Scenario::load(file)?;
    sc.apply(&Overrides {
        out: cli.out.clone(),
        segments: cli.segments,
        seed: cli.seed,
    })
    .map_err(|e| FermatError::Argument(e.to_string()))?;
    let out = sc.out_dir();
    let say = |s: String| {
        if !cli.quiet {
            print!("{s}");
        }
    };

    match cli.command {
        Command::Validate { .. } => {
            let v = cmd_validate(&sc, &out)?;
            say(v.render());
            if let Err(e) = v.gate() {
                eprintln!("validation failed: {e}");
                return Ok(3);
            }
        }
        Command::Solve { .. } => {
            let s = cmd_solve(&sc, &out)?;
            say(s.render());
        }
        Command::Sweep { .. } => {
            let s = cmd_sweep(&sc, &out)?;
            say(s.render());
            if !s.monotone() {
                eprintln!("warning: arrival times are not monotone in kappa within a winding class");
            }
        }
    }
    if !cli.quiet {
        println!("results in {} (override with --out or {OUT_DIR_ENV})", out.display());
    }
    Ok(0)
}
