//! Command-line driver. Parsing and config merging live in [`opts`], the
//! command bodies in [`cmd`]; this file only wires them to an output stream
//! and maps error variants onto exit codes.

mod cmd;
mod opts;

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::Parser;
use younglat::{Error, Result};

fn main() {
    let cli = opts::Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn run(cli: opts::Cli) -> Result<()> {
    let (out, action) = opts::resolve(cli)?;
    // The output file is created only after validation, so a rejected
    // invocation never leaves an empty file behind.
    let mut w: Box<dyn Write> = match &out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    cmd::run(action, &mut w)?;
    w.flush()?;
    Ok(())
}

/// 0 success, 2 domain error, 3 resource cap, 4 numerical failure;
/// 1 is reserved for i/o failures.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded(_) => 3,
        Error::NoConvergence { .. } => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}
