use clap::Parser;

fn main() {
    let cli = secdisc::cli::Cli::parse();
    if let Err(e) = secdisc::cli::execute(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
