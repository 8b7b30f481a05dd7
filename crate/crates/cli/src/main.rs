use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use qisi_cli::{run, Cli, CliError};

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            let res = run(&cli.command, &mut w);
            w.flush()?;
            res
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            let res = run(&cli.command, &mut w);
            w.flush()?;
            res
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qisi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
