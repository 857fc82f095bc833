use std::process::ExitCode;

fn main() -> ExitCode {
    esla_cli::main_with_args(std::env::args_os())
}
