use std::process::ExitCode;

use clap::Parser;
use mixorder::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
