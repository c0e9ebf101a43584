use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(caseflux::cli::run(std::env::args_os()))
}
