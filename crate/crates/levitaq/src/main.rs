use std::process::ExitCode;

use levitaq::cli::{run, Invocation};

fn main() -> ExitCode {
    match run(std::env::args_os(), std::env::var_os("LEVITAQ_OUT_DIR")) {
        Ok(Invocation::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Invocation::Completed { outcome, .. }) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
