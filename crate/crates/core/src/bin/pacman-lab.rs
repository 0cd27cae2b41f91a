fn main() {
    std::process::exit(pacman_green::cli::dispatch(std::env::args_os()));
}
