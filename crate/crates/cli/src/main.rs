fn main() -> std::process::ExitCode {
    thermocav_cli::main_with_args(std::env::args_os())
}
