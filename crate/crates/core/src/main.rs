fn main() {
    let code = coulomb_limit::cli::run(std::env::args_os());
    std::process::exit(code);
}
