use clap::Parser;
use lfo_core::cli::{self, CliConfig, Io};

fn main() {
    let cfg = CliConfig::parse();
    let code = cli::run(
        &cfg,
        &mut Io {
            stdin: &mut std::io::stdin().lock(),
            stdout: &mut std::io::stdout().lock(),
            stderr: &mut std::io::stderr().lock(),
        },
    );
    std::process::exit(code);
}
