use std::process::ExitCode;

fn main() -> ExitCode {
    taxonomy_forge_cli::run(std::env::args_os())
}
