use clap::Parser;

fn main() {
    let cli = nsc_lab::Cli::parse();
    std::process::exit(nsc_lab::run(&cli));
}
