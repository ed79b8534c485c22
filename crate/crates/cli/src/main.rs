use clap::Parser;
use loadsynth_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = loadsynth_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
