fn main() {
    pmplab::cli::configure_threads();
    let (code, out) = pmplab::cli::run(std::env::args_os());
    if code == pmplab::cli::EXIT_USAGE {
        eprint!("{out}");
    } else {
        println!("{}", out.trim_end());
    }
    std::process::exit(code);
}
