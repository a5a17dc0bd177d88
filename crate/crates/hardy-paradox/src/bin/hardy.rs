use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hardy_paradox::cli::run() as u8)
}
