fn main() {
    std::process::exit(crt_sis::cli::cli_dispatch(std::env::args_os()));
}
