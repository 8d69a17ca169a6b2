use clap::Parser;

fn main() {
    let cli = berryreach::cli::Cli::parse();
    if let Err(e) = berryreach::cli::run(cli) {
        if e.is_broken_pipe() {
            std::process::exit(berryreach::error::EXIT_OK);
        }
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
