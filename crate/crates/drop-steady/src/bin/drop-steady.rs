//! Command-line entry point; see [`drop_steady::cli`].

fn main() {
    std::process::exit(drop_steady::cli::run(std::env::args_os()));
}
