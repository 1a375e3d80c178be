fn main() {
    std::process::exit(qqfusion::cli::main_with_args(std::env::args_os()));
}
