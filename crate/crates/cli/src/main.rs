fn main() {
    std::process::exit(scorelab::main_with_args(std::env::args_os()));
}
