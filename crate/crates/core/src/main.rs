fn main() {
    std::process::exit(pla_workbench::cli::run(std::env::args_os()));
}
