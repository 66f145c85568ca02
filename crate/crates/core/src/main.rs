fn main() {
    std::process::exit(l1pca::cli::run(std::env::args_os()));
}
