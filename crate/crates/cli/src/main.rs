fn main() {
    std::process::exit(rankprob_cli::main_with_args(std::env::args_os()));
}
