fn main() -> std::process::ExitCode {
    layerpaint::cli::main()
}
