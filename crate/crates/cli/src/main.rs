use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tap_cli::run(std::env::args_os()))
}
