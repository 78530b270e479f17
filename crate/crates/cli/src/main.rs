use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use delaycount::io::config::parse_quantum;
use delaycount::run::{load_config, run, Command, RunOptions};
use delaycount::Error;

#[derive(Parser)]
#[command(
    name = "delaycount",
    version,
    about = "Time-delay resonance counting for layered 1D potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `[output] dir`. Default `out`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Counting quantum: h, hbar or custom=VALUE.
    #[arg(long, global = true, value_name = "Q")]
    quantum: Option<String>,

    /// Use the literal sign of the phase formula (downward sweep).
    #[arg(long, global = true)]
    paper_sign: bool,

    /// Worker threads; all cores when omitted.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for the noise fixtures of `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Time delay and its running integral over the grid.
    Scan,
    /// Resonance count from the integrated delay.
    Count,
    /// Breit-Wigner fits of the detected resonances.
    Fit,
    /// Ramped oscillator run and contraction exponent.
    Oscillator,
    /// Kernel, Wigner distribution and phase-space integral.
    Wigner,
    /// Delay profile from a phase-shift table.
    Ingest,
    /// Full invariant suite.
    Verify,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Scan => Command::Scan,
            Sub::Count => Command::Count,
            Sub::Fit => Command::Fit,
            Sub::Oscillator => Command::Oscillator,
            Sub::Wigner => Command::Wigner,
            Sub::Ingest => Command::Ingest,
            Sub::Verify => Command::Verify,
        }
    }
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let path = cli
        .config
        .ok_or_else(|| Error::InvalidInput("--config PATH is required".into()))?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let cfg = load_config(&path)?;
    let opts = RunOptions {
        quantum: cli.quantum.as_deref().map(parse_quantum).transpose()?,
        paper_sign: cli.paper_sign,
        seed: cli.seed,
        base_dir: path.parent().map(PathBuf::from).unwrap_or_default(),
    };
    let result = run(cli.command.into(), &cfg, &opts)?;
    let dir = cli
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    result.outputs.write_all(&dir)?;
    print!("{}", result.report);
    Ok(!result.failed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("delaycount: invariant checks failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("delaycount: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
