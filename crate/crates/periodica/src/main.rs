use std::process::ExitCode;

fn main() -> ExitCode {
    periodica::cli::main()
}
