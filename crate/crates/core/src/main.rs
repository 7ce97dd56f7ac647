use clap::Parser;

fn main() {
    let cli = stem::cli::Cli::parse();
    stem::cli::init_logging(&cli);
    if let Err(e) = stem::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
