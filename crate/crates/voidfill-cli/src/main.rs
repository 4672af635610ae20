use clap::Parser;

fn main() {
    let cli = voidfill_cli::Cli::parse();
    std::process::exit(voidfill_cli::run(cli));
}
