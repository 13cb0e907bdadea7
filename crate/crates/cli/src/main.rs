fn main() {
    std::process::exit(coopsim_cli::parse_and_dispatch(std::env::args_os()));
}
