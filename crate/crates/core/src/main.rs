use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fkc::cli::{self, Command};

#[derive(Parser)]
#[command(name = "fkc", version, about = "Contractivity classifier and solvers for Feynman-Kac semigroups")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the scenario's task.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the task at every point of the [grid] section.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check the standing assumptions only.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = cli::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(cli::EXIT_INTERNAL as u8);
    }
    let (cmd, config, out) = match args.cmd {
        Cmd::Run { config, out } => (Command::Run, config, out),
        Cmd::Sweep { config, out } => (Command::Sweep, config, out),
        Cmd::Validate { config } => (Command::Validate, config, PathBuf::from(".")),
    };
    match cli::execute(cmd, &config, &out) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.status == cli::EXIT_OK {
                print!("{}", if cmd == Command::Validate { &o.message } else { "" });
            } else {
                eprintln!("{}", o.message.trim_end());
            }
            ExitCode::from(o.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_status(&e) as u8)
        }
    }
}
