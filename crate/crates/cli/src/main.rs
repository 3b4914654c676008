use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use selfsim_cli::{ml_table, parse_config, run, Command, Output, RunError};

#[derive(Parser)]
#[command(name = "selfsim", version, about = "Memory-kernel diffusion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the Mittag-Leffler function E_alpha on [zmin, zmax].
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmax: f64,
        #[arg(long)]
        n: usize,
    },
    /// Evolve initial data and write the Fourier modes at each t.
    Solve { config: PathBuf },
    /// Distance of rescaled solutions to the limit profile along a T ladder.
    Converge { config: PathBuf },
    /// Leading-order decay rate for kernels with finite A_inf.
    Rate { config: PathBuf },
    /// Viscoelastic velocity against the compressible Stokes solution.
    Visco { config: PathBuf },
    /// Report positive-definiteness and regular variation of a kernel.
    ValidateKernel { config: PathBuf },
}

fn execute(command: Command, path: &Path) -> anyhow::Result<Result<(), RunError>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = match parse_config(command, &text) {
        Ok(c) => c,
        Err(e) => return Ok(Err(e.into())),
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return Ok(Err(e)),
    };
    match (&out, &cfg.output) {
        (Output::Csv(body), Some(prefix)) => {
            let file = PathBuf::from(format!("{}-{}.csv", prefix.display(), command.name()));
            std::fs::write(&file, body).with_context(|| format!("writing {}", file.display()))?;
            eprintln!("wrote {}", file.display());
        }
        _ => print!("{}", out.text()),
    }
    Ok(Ok(()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Ml { alpha, zmin, zmax, n } => flatten(Ok(ml_table(alpha, zmin, zmax, n).map(|o| print!("{}", o.text())))),
        Cmd::Solve { config } => flatten(execute(Command::Solve, &config)),
        Cmd::Converge { config } => flatten(execute(Command::Converge, &config)),
        Cmd::Rate { config } => flatten(execute(Command::Rate, &config)),
        Cmd::Visco { config } => flatten(execute(Command::Visco, &config)),
        Cmd::ValidateKernel { config } => flatten(execute(Command::ValidateKernel, &config)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn flatten(r: anyhow::Result<Result<(), RunError>>) -> Result<(), (u8, String)> {
    match r {
        Ok(Ok(())) => Ok(()),
        Ok(Err(e)) => Err((e.exit_code() as u8, e.to_string())),
        Err(e) => Err((1, format!("{e:#}"))),
    }
}
