use std::process::ExitCode;

fn main() -> ExitCode {
    qklauder::cli::main_with_args(std::env::args_os())
}
