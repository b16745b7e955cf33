use std::process::ExitCode;

use clap::Parser;
use esp_cli::{execute, write_output, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|(output, out)| {
        for w in &output.warnings {
            eprintln!("warning: {w}");
        }
        write_output(&output, out.as_deref())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
