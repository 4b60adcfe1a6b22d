//! The `resegment` command-line tool.
//!
//! [`run`] is the whole program minus process exit, so tests can drive it
//! in-process with captured output streams.

mod args;
mod commands;
mod error;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use resegment::config::PipelineConfig;

pub use args::{Cli, Command, ReportFormat};
pub use error::{CliError, Result};

/// Environment variable naming a configuration file used when `--config` is absent.
pub const CONFIG_ENV: &str = "RESEGMENT_CONFIG";

/// Runs one invocation and returns its exit status: 0 success, 1 usage
/// error, 2 malformed input, 3 internal invariant violation.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config_path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let config = match &config_path {
        Some(path) => load_config(path)?,
        None => PipelineConfig::default(),
    };
    let mut ctx = commands::Context {
        config,
        format: cli.format,
        stdout,
        stderr,
    };
    commands::dispatch(&mut ctx, cli.command)
}

fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    PipelineConfig::from_toml_str(&text).map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
}
