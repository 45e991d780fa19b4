use clap::Parser;

fn main() {
    let cli = propp_cli::Cli::parse();
    std::process::exit(propp_cli::run(cli));
}
