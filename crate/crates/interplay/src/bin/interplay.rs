use clap::Parser;

fn main() {
    let cli = interplay::cli::Cli::parse();
    std::process::exit(interplay::cli::run(&cli));
}
