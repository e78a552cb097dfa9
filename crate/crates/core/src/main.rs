use clap::Parser;
use heraldlab::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}
