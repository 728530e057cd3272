use std::process::ExitCode;

fn main() -> ExitCode {
    sharegrasp::cli::main_entry()
}
