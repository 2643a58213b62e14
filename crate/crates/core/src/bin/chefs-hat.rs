fn main() {
    std::process::exit(chefs_hat::cli::run(std::env::args_os()));
}
