use clap::Parser;
use farpls_server::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(Cli::parse())
}
