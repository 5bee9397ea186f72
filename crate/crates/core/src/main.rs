fn main() -> std::process::ExitCode {
    delta_nls::cli::main_entry()
}
