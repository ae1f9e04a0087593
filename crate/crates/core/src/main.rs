fn main() {
    std::process::exit(lrbound::cli::run(std::env::args_os()));
}
