//! Drives a command from a TOML file, the way the binary does.
//! Usage: `cargo run --example config_driven [config.toml] [out_dir]`

use std::path::{Path, PathBuf};

use bidomain_lab::cli_io::{execute, load_config};

fn main() -> bidomain_lab::Result<()> {
    let default = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/stability.toml");
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or(default);
    let cfg = load_config(&path)?;
    let out = std::env::args()
        .nth(2)
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output.dir.clone());
    println!("{} from {}", cfg.command.name(), path.display());
    let outcome = execute(cfg.command, &cfg, &out)?;
    outcome.lines.iter().for_each(|l| println!("{l}"));
    outcome.files.iter().for_each(|f| println!("wrote {}", f.display()));
    Ok(())
}
