use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = qpullback::cli::Cli::parse();
    std::process::exit(qpullback::cli::run(&cli));
}
