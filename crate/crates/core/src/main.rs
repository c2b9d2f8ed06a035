use clap::Parser;
use ris_harmonics::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
