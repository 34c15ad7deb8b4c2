//! Command-line front end: dataset ingestion, configuration, orchestration of
//! abstraction runs and serialisation of every summary artifact.

pub mod args;
pub mod commands;
pub mod error;
pub mod export;
pub mod io;
pub mod model;

use std::path::Path;

use anyhow::Result;

use args::{Cli, Command};
use commands::{write_outputs, AnalyzeRequest};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Abstract(args) => {
            let cfg = args.resolve()?;
            let files = commands::abstract_outputs(&cfg)?;
            write_outputs(&cfg.output, &files)?;
            println!("wrote {} files to {}", files.len(), cfg.output.display());
        }
        Command::Analyze(args) => {
            let req = AnalyzeRequest {
                model: args.model,
                input: args.input,
                episodes: args.episodes,
                windows: args.windows,
                t: args.t,
            };
            let files = commands::analyze_outputs(&req)?;
            write_outputs(&args.output, &files)?;
            println!("wrote {} files to {}", files.len(), args.output.display());
        }
        Command::Generate(args) => {
            let cfg = args.resolve()?;
            let files = commands::generate_outputs(&cfg)?;
            write_outputs(Path::new("."), &files)?;
            println!("wrote {}", cfg.output.display());
        }
        Command::Scaling(args) => {
            let run = args.resolve()?;
            let files = commands::scaling_outputs(&run)?;
            write_outputs(&run.output, &files)?;
            println!("wrote {} files to {}", files.len(), run.output.display());
        }
    }
    Ok(())
}
