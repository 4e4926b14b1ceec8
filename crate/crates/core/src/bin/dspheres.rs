fn main() {
    std::process::exit(dspheres::cli::run(std::env::args_os()));
}
