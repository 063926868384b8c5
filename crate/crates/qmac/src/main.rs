use clap::Parser;

fn main() {
    let cli = qmac::cli::Cli::parse();
    std::process::exit(qmac::cli::run(cli));
}
