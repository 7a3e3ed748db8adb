fn main() {
    std::process::exit(logsep_core::experiments::cli(std::env::args_os()));
}
