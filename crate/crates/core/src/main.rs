use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sds::cli::run(std::env::args_os()))
}
