//! Command-line front end: scenario configs, parameter sweeps and CSV
//! output.
//!
//! ```text
//! isac <command> [--config FILE] [--out FILE] [--key=value ...]
//! ```
//!
//! Each run writes one CSV file and a `<out>.config` sidecar holding the
//! fully resolved configuration. Feeding the sidecar back through
//! `--config` reproduces the CSV byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::Command;
pub use config::ScenarioConfig;
pub use error::{CliError, ConfigError};

use clap::Parser;

#[derive(Debug, Parser)]
#[command(
    name = "isac",
    version,
    about = "Capacity, sensing CRB and pilot-length sweeps for pilot-sharing ISAC slots",
    override_usage = "isac <COMMAND> [--config FILE] [--out FILE] [--KEY=VALUE ...]",
    after_help = "Any config key can be overridden as --key=value, for example --snr_db=20 --n_samples=1000000.\n\
                  Exit codes: 0 success, 2 config error, 3 numerical failure, 1 I/O error."
)]
pub struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output CSV path; defaults to `<command>.csv` in $ISAC_OUTPUT_DIR or
    /// the working directory.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// `--key=value` overrides, split off before clap sees the arguments.
    #[arg(skip)]
    pub overrides: Vec<String>,
}

impl Cli {
    /// Parses process arguments. Every `--key=value` other than `--config=`
    /// and `--out=` is set aside as an override, wherever it appears.
    pub fn parse_args<I, S>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut rest = Vec::new();
        let mut overrides = Vec::new();
        for (i, arg) in args.into_iter().map(Into::into).enumerate() {
            let is_override = i > 0
                && arg
                    .strip_prefix("--")
                    .and_then(|b| b.split_once('='))
                    .is_some_and(|(k, _)| !matches!(k, "config" | "out"));
            if is_override {
                overrides.push(arg);
            } else {
                rest.push(arg);
            }
        }
        let mut cli = Self::try_parse_from(rest)?;
        cli.overrides = overrides;
        Ok(cli)
    }
}

/// Sidecar path holding the resolved config for `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

/// Runs one command and returns the path of the CSV written.
pub fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let cfg = ScenarioConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| config::default_output(cli.command.name()));
    let table = commands::execute(cli.command, &cfg)?;
    table::write_atomic(&sidecar_path(&out), cfg.echo().as_bytes())?;
    table::write_atomic(&out, &table.to_csv())?;
    Ok(out)
}
