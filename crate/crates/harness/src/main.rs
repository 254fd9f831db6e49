use std::io::Write;

use clap::Parser;
use mgrit_modes_harness::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let out = execute(&cli);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    std::process::exit(out.code);
}
