use clap::Parser;

fn main() {
    let cli = randstop::cli::Cli::parse();
    std::process::exit(randstop::cli::run(cli));
}
