use isac_cli::{run, Cli};

fn main() {
    let cli = Cli::parse_args(std::env::args()).unwrap_or_else(|e| e.exit());
    match run(&cli) {
        Ok(path) => eprintln!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("isac: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
