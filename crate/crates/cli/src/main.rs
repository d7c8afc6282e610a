use clap::Parser;
use zeno_trap_cli::{Cli, run};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            for f in &manifest.files {
                println!("{}", cli.global.out_dir.join(&f.file).display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
