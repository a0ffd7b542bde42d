use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(uner::cli::run(std::env::args_os()))
}
