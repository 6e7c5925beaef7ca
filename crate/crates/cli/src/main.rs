fn main() {
    std::process::exit(ovskale::main_with_args(std::env::args_os()));
}
