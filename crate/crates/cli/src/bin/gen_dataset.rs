use clap::Parser;
use onebit_doa_cli::{gen_dataset, GenDatasetArgs};

#[derive(Parser)]
#[command(name = "gen-dataset", version, about = "Generate a labeled one-bit DOA corpus")]
struct Cli {
    #[command(flatten)]
    args: GenDatasetArgs,
}

fn main() -> anyhow::Result<()> {
    gen_dataset(&Cli::parse().args, &mut std::io::stdout().lock())
}
