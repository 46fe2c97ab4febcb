use clap::Parser;
use lri_control::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
