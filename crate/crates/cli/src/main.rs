use std::process::ExitCode;

use clap::Parser;
use factlab_cli::{exit_code, run, write_output, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(config, out)| {
        let text = write_output(&config, &out)?;
        if config.output.is_none() {
            print!("{text}");
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
