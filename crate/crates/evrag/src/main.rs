fn main() -> std::process::ExitCode {
    evrag::cli::main()
}
