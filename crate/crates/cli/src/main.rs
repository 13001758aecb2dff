//! `lcspec`: batch front end for spectral computations on half-line
//! Sturm-Liouville problems.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 inconclusive
//! result, 3 verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;

use commands::{Outcome, Overrides};

#[derive(Parser, Debug)]
#[command(
    name = "lcspec",
    version,
    about = "Resolvents, eigenvalues and spectral checks for limit-circle Sturm-Liouville problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the endpoint at infinity (LC/LP) and choose a truncation point.
    Classify(Args),
    /// Eigenvalues of A_t in a window, as CSV.
    Eig(Args),
    /// Resolvent R_t(z) h on the grid, as CSV.
    Resolvent(Args),
    /// Check the Cauchy-transform formula for the spectral measure, as JSON.
    Spectral(Args),
    /// Run the verification suite, as JSON.
    Verify(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// TOML problem file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Spectral window, overriding the config.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Spectral parameter, overriding the config.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true)]
    z: Option<Vec<f64>>,
    /// Right-hand side h(x), overriding the config.
    #[arg(long, value_name = "EXPR")]
    h: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Use the limit-point resolvent (Weyl function) path.
    #[arg(long)]
    lp: bool,
}

fn run(cmd: Command) -> Result<Outcome, commands::CliError> {
    let (name, args) = match cmd {
        Command::Classify(a) => ("classify", a),
        Command::Eig(a) => ("eig", a),
        Command::Resolvent(a) => ("resolvent", a),
        Command::Spectral(a) => ("spectral", a),
        Command::Verify(a) => ("verify", a),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(commands::CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| commands::CliError::usage(e.to_string()))?;
    }
    let text = fs::read_to_string(&args.config)
        .map_err(|e| commands::CliError::usage(format!("cannot read {}: {e}", args.config.display())))?;
    let overrides = Overrides {
        window: args.window.map(|w| [w[0], w[1]]),
        z: args.z.map(|z| [z[0], z[1]]),
        h: args.h,
        lp: args.lp,
    };
    let outcome = commands::dispatch(name, &text, &overrides)?;
    match &args.out {
        Some(path) => fs::write(path, &outcome.body)
            .map_err(|e| commands::CliError::usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| commands::CliError::usage(e.to_string()))?;
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            for line in &outcome.messages {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("lcspec: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
