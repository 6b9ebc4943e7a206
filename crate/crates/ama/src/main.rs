use clap::Parser;

fn main() {
    let cli = ama::cli::Cli::parse();
    std::process::exit(ama::cli::dispatch(cli));
}
