use clap::Parser;

use radwave::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
