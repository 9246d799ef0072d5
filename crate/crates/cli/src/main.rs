use clap::Parser;

fn main() {
    std::process::exit(ee_cli::main_with(ee_cli::Cli::parse()));
}
