fn main() {
    std::process::exit(csvt_cli::cli_main(std::env::args_os()));
}
