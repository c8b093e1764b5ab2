use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, ValueEnum};

use bidomain_lab::cli_io::{execute, load_config, resolve_out_dir, Command, OUT_DIR_ENV};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Run,
    Mms,
    Energy,
    Coercivity,
    BetaSweep,
    Stability,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Run => Command::Run,
            Sub::Mms => Command::Mms,
            Sub::Energy => Command::Energy,
            Sub::Coercivity => Command::Coercivity,
            Sub::BetaSweep => Command::BetaSweep,
            Sub::Stability => Command::Stability,
        }
    }
}

/// Bidomain simulator with a diffusive inclusion and its verification studies.
#[derive(Debug, Parser)]
#[command(name = "bidomain-lab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides BIDOMAIN_OUT and output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized data; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            eprint!("{e}");
            eprintln!("{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let env = std::env::var(OUT_DIR_ENV).ok();
    let out = resolve_out_dir(cli.out.as_deref(), env.as_deref(), &cfg);
    let command = Command::from(cli.command);
    match execute(command, &cfg, &out) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            match outcome.verdict {
                Some(false) => {
                    println!("{}: FAIL", command.name());
                    ExitCode::FAILURE
                }
                Some(true) => {
                    println!("{}: PASS", command.name());
                    ExitCode::SUCCESS
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
