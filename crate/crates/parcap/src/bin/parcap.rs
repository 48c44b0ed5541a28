fn main() {
    std::process::exit(parcap::harness::cli_run(std::env::args_os()));
}
