fn main() {
    std::process::exit(richards_front_cli::main_with_args(std::env::args_os()));
}
