fn main() {
    dropletfem::cli::init_logging();
    std::process::exit(dropletfem::cli::main_with_args(std::env::args_os()));
}
