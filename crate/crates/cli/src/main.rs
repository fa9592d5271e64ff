use clap::Parser;

fn main() {
    let cli = pvsub_cli::Cli::parse();
    if let Err(failure) = pvsub_cli::run(cli) {
        eprintln!("error: {failure}");
        std::process::exit(failure.code);
    }
}
