fn main() {
    std::process::exit(quakefilter::cli::run(std::env::args_os()));
}
