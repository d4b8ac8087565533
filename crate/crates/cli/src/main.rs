use std::io::ErrorKind;

use clap::Parser;
use onebit_doa_cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    match run(Cli::parse(), &mut std::io::stdout().lock()) {
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == ErrorKind::BrokenPipe) => Ok(()),
        other => other,
    }
}
