//! `--config FILE` support: `key = value` lines whose keys are long flag
//! names of the chosen subcommand. Values are appended to the argument list
//! only for flags not given on the command line, so flags always win.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use clap::CommandFactory;

use crate::Cli;

/// Returns `args` with config entries spliced in, or `args` unchanged when
/// no `--config` flag is present.
pub fn apply(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let Some(sub) = subcommand(&args) else {
        return Ok(args);
    };
    let command = Cli::command();
    let spec = command
        .find_subcommand(&sub)
        .ok_or_else(|| anyhow!("unknown subcommand {sub:?}"))?;

    let mut extra = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), k + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let arg = spec
            .get_arguments()
            .find(|a| a.get_long() == Some(key) && key != "config")
            .ok_or_else(|| {
                anyhow!(
                    "{}:{}: {key:?} is not an option of `{sub}`",
                    path.display(),
                    k + 1
                )
            })?;
        if given(&args, key) {
            continue;
        }
        let flag = format!("--{key}");
        if arg.get_action().takes_values() {
            extra.push(flag);
            extra.push(value.to_string());
        } else {
            match value {
                "true" | "yes" | "1" => extra.push(flag),
                "false" | "no" | "0" => {}
                _ => {
                    return Err(anyhow!(
                        "{}:{}: {key:?} expects true or false",
                        path.display(),
                        k + 1
                    ))
                }
            }
        }
    }
    let mut out = args;
    out.extend(extra);
    Ok(out)
}

fn config_path(args: &[String]) -> Option<std::path::PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(|p| Path::new(p).to_path_buf());
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(Path::new(p).to_path_buf());
        }
    }
    None
}

fn subcommand(args: &[String]) -> Option<String> {
    let command = Cli::command();
    args.iter()
        .skip(1)
        .find(|a| command.find_subcommand(a.as_str()).is_some())
        .cloned()
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| *a == flag || a.starts_with(&prefix))
}
