fn main() {
    std::process::exit(framelab_cli::main_with_args(std::env::args_os()));
}
