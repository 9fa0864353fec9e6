use std::process::ExitCode;

fn main() -> ExitCode {
    bandpert::cli::main_with_args(std::env::args_os())
}
