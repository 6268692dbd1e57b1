fn main() -> std::process::ExitCode {
    mmab::cli::main()
}
