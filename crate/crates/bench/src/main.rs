fn main() -> std::process::ExitCode {
    lazycg_bench::cli::main()
}
