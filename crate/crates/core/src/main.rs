fn main() -> std::process::ExitCode {
    poisson_mobility::cli::main()
}
