fn main() -> std::process::ExitCode {
    cofe::cli::main()
}
