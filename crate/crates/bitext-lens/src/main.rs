fn main() {
    std::process::exit(bitext_lens::cli::run(std::env::args_os()));
}
