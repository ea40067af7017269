fn main() {
    std::process::exit(clusterforge::cli::main_with_args(std::env::args_os()));
}
