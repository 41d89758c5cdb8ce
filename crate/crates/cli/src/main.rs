use std::process::ExitCode;

fn main() -> ExitCode {
    mackey_cli::main_exit()
}
