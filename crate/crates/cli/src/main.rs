use clap::Parser;

fn main() {
    std::process::exit(sampledyn_cli::main_with(sampledyn_cli::Cli::parse()));
}
