fn main() {
    std::process::exit(gstg_cli::run(std::env::args_os()));
}
