fn main() {
    std::process::exit(flatlab_cli::run(std::env::args_os()));
}
