mod args;
mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Format};
use table::{error_record, render, Output};

// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or computation error.
const EXIT_CHECK: u8 = 1;
const EXIT_ERROR: u8 = 2;

/// Best-effort format for error records when argument parsing itself failed.
fn scan_format(argv: &[String]) -> Format {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let v = if a == "--format" { it.next().map(String::as_str) } else { a.strip_prefix("--format=") };
        if v == Some("json") {
            return Format::Json;
        }
    }
    Format::Csv
}

fn run(cli: &Cli) -> moyal_core::Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Spectrum { levels } => commands::spectrum(g, *levels),
        Command::Compare(a) => commands::compare(g, a),
        Command::Ratio(a) => commands::ratio(g, a),
        Command::Geodesic => commands::geodesic(g),
        Command::Double(a) => commands::double(g, a),
        Command::Star(a) => commands::star(g, a),
    }
}

fn emit(cli: &Cli, out: &Output) -> io::Result<()> {
    match &cli.global.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            render(out, cli.global.format, &mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            render(out, cli.global.format, &mut w)?;
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            print!("{}", error_record("usage", first, scan_format(&argv)));
            eprint!("{detail}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out) {
                print!("{}", error_record("io", &e.to_string(), cli.global.format));
                return ExitCode::from(EXIT_ERROR);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK)
            }
        }
        Err(e) => {
            print!("{}", error_record(e.kind(), &e.to_string(), cli.global.format));
            ExitCode::from(EXIT_ERROR)
        }
    }
}
