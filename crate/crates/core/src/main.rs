fn main() {
    std::process::exit(srdcnn::cli::run(std::env::args_os()));
}
