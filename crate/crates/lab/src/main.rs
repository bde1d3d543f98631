use clap::Parser;

fn main() {
    std::process::exit(opspace_lab::run(opspace_lab::Cli::parse()));
}
