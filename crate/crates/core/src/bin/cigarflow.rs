fn main() {
    std::process::exit(cigarflow::harness::main_with_args(std::env::args_os()));
}
