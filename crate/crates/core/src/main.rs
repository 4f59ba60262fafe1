use clap::Parser;

fn main() {
    let cli = susy_forge::cli::Cli::parse();
    std::process::exit(susy_forge::cli::run(cli));
}
