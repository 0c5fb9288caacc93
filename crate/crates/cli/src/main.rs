use clap::Parser;

fn main() {
    let cli = rotcap_cli::Cli::parse();
    std::process::exit(rotcap_cli::run(&cli));
}
