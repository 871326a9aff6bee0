use clap::Parser;
use z2gauge::cli::{execute, Cli, Command};

fn main() {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Run(args) => execute(args),
    };
    std::process::exit(code);
}
