fn main() -> std::process::ExitCode {
    spheroid_sim::cli::main_with_args(std::env::args_os())
}
