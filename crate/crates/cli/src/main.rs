use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsteer_cli::{run, Mode, RunSpec};

#[derive(Parser)]
#[command(name = "qsteer", version, about = "Steer a driven two-level system toward a target state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the decoherence function g(tau).
    Decoherence(Common),
    /// Open-loop targeting along a single control axis.
    Target(Common),
    /// Two targeting legs on different axes.
    Composite(Common),
    /// Measurement-based feedback: trajectory, ensemble or master equation.
    Feedback(Common),
    /// Open-loop and feedback drives for the same endpoints.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $QSTEER_OUT_ROOT/<mode> or ./qsteer-out/<mode>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a configuration value, e.g. `target.i_max=0.02`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for the feedback noise.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Decoherence(a) => (Mode::Decoherence, a),
        Command::Target(a) => (Mode::Target, a),
        Command::Composite(a) => (Mode::Composite, a),
        Command::Feedback(a) => (Mode::Feedback, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    let spec = RunSpec { mode, config: args.config, out: args.out, overrides: args.set, seed: args.seed };
    match run(&spec) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                eprintln!("thresholds not met; see {}", outcome.out_dir.display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
