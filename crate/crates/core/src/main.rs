fn main() {
    std::process::exit(sentiment_pipeline::cli::main_with_args(std::env::args_os()));
}
