use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hardlinrl::main_with(std::env::args().collect()))
}
