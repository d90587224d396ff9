use clap::Parser;

fn main() {
    // clap prints help/version to stdout and exits 0; real parse errors go
    // to stderr with exit code 2, matching the input/validation class.
    let cli = match gwve_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = gwve_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
