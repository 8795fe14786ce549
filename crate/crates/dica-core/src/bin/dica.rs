use clap::Parser;
use dica_core::cli::{exit_code, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(error) = cli.run() {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}
