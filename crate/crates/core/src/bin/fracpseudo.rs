fn main() -> std::process::ExitCode {
    fracpseudo::cli::main_with_args(std::env::args_os())
}
