fn main() -> std::process::ExitCode {
    presy::cli::run()
}
