use clap::Parser;

fn main() {
    let cli = ph_cli::Cli::parse();
    std::process::exit(ph_cli::run(&cli));
}
