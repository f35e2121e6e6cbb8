use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bisym::cli::run(std::env::args_os()))
}
