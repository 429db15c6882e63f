use clap::Parser;

use readmit_cli::Cli;

/// Exit codes: 0 success, 1 runtime failure, 2 usage error. Clap handles
/// the usage path itself (printing to stderr, exiting 2; help and version
/// print to stdout and exit 0).
fn main() {
    let cli = Cli::parse();
    if let Err(e) = readmit_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
