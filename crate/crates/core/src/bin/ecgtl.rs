use clap::Parser;
use ecgtl_core::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
