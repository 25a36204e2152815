fn main() {
    std::process::exit(futurecone::cli::run(std::env::args_os()));
}
