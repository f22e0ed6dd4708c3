fn main() {
    std::process::exit(hecke_walk::cli::main_with_args(std::env::args_os()));
}
