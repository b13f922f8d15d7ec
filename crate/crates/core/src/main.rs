fn main() {
    std::process::exit(homerange::io::cli::dispatch(std::env::args_os()));
}
