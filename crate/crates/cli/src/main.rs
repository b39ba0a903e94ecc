fn main() {
    std::process::exit(qgeom_cli::main_with_args(std::env::args_os()));
}
