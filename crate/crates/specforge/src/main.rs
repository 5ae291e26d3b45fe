use clap::Parser;
use specforge::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout();
    if let Err(e) = run(&cli, &mut input, &mut out) {
        eprintln!("specforge: {e}");
        std::process::exit(e.exit_code());
    }
}
