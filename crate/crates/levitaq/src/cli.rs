//! Argument parsing and run-directory handling.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Arg, ArgAction, Command};

use crate::commands::{find, Outcome, RunDir, SUBCOMMANDS};
use crate::error::CliError;
use crate::params::Params;

/// Run-directory root when neither `--out-dir` nor `LEVITAQ_OUT_DIR` is set.
pub const DEFAULT_OUT_ROOT: &str = "levitaq-runs";

pub fn command() -> Command {
    let mut cmd = Command::new("levitaq")
        .about("Simulate and analyze charged NV diamonds levitated in a Paul trap")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in &SUBCOMMANDS {
        let mut c = Command::new(sub.name)
            .about(sub.about)
            .after_help("Every parameter may also be set as `key = value` in the config file; flags win.")
            .arg(
                Arg::new("config")
                    .long("config")
                    .short('c')
                    .value_name("FILE")
                    .help("flat key = value parameter file"),
            )
            .arg(
                Arg::new("out-dir")
                    .long("out-dir")
                    .value_name("DIR")
                    .help("run-directory root (default: $LEVITAQ_OUT_DIR, else levitaq-runs)"),
            );
        for spec in (sub.specs)() {
            c = c.arg(
                Arg::new(spec.key)
                    .long(spec.key.replace('_', "-"))
                    .value_name("VALUE")
                    .allow_hyphen_values(true)
                    .action(ArgAction::Set)
                    .help(format!("{} [default: {}]", spec.help, display_default(spec.default))),
            );
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

fn display_default(d: &str) -> &str {
    if d.is_empty() {
        "required"
    } else {
        d
    }
}

#[derive(Debug)]
pub enum Invocation {
    /// Help or version text requested.
    Help(String),
    Completed { outcome: Outcome, run_dir: PathBuf },
}

/// Parses `args` (including the program name), runs the subcommand, and
/// returns its summary. `env_out_dir` is the value of `LEVITAQ_OUT_DIR`.
pub fn run<I, T>(args: I, env_out_dir: Option<OsString>) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Ok(Invocation::Help(e.render().to_string())),
                _ => {
                    let text = e.render().to_string();
                    let text = text.strip_prefix("error: ").unwrap_or(&text);
                    Err(CliError::Usage(text.trim_end().to_string()))
                }
            };
        }
    };
    let (name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = find(name).expect("registered subcommand");

    let mut params = Params::defaults(sub.name, (sub.specs)());
    if let Some(path) = sub_matches.get_one::<String>("config") {
        params.apply_file(&PathBuf::from(path))?;
    }
    let keys: Vec<&'static str> = params.specs().iter().map(|s| s.key).collect();
    for key in keys {
        if let Some(v) = sub_matches.get_one::<String>(key) {
            params.set(key, v, "command line")?;
        }
    }

    let root = sub_matches
        .get_one::<String>("out-dir")
        .map(PathBuf::from)
        .or_else(|| env_out_dir.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
    let dir = RunDir(root.join(sub.name));
    std::fs::create_dir_all(&dir.0).map_err(|source| CliError::Output {
        path: dir.0.clone(),
        source,
    })?;
    let write = |name: &str, text: &str| {
        let path = dir.file(name);
        std::fs::write(&path, text).map_err(|source| CliError::Output { path, source })
    };
    write("params.txt", &params.render())?;
    let outcome = (sub.run)(&params, &dir)?;
    write("summary.txt", &format!("{}\n", outcome.summary))?;
    Ok(Invocation::Completed {
        outcome,
        run_dir: dir.0,
    })
}
