use clap::Parser;

use csta_cli::args::Cli;
use csta_cli::error::classify;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = csta_cli::run(cli) {
        let (code, label) = classify(&err);
        eprintln!("error [{label}]: {err:#}");
        std::process::exit(code);
    }
}
