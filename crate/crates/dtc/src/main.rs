use anyhow::Result;
use clap::Parser;

use dtc::cli::{execute, Cli};

fn main() -> Result<()> {
    // DTC_THREADS caps parallelism for worker execution and sweep cells.
    if let Ok(threads) = std::env::var("DTC_THREADS") {
        let threads: usize = threads
            .parse()
            .map_err(|_| anyhow::anyhow!("DTC_THREADS must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    execute(Cli::parse())
}
