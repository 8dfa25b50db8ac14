fn main() {
    std::process::exit(qaffine_boundary::cli::cmd_dispatch(std::env::args_os()));
}
