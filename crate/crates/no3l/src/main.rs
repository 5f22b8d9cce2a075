fn main() -> std::process::ExitCode {
    no3l::cli::main()
}
