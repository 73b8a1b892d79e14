//! `--config` files. A config file is a JSON object whose keys name long
//! flags of the chosen subcommand (`max_iters` or `max-iters`). Its values
//! are spliced in right after the subcommand, ahead of the user's own
//! flags, so the command line wins. For `pipeline`, keys other than the run
//! flags are fields of the pipeline configuration instead.

use std::ffi::OsString;
use std::fs;

use clap::{CommandFactory, FromArgMatches};
use serde_json::{Map, Value};
use zok_core::{Error, Result};

use crate::cli::{Cli, PIPELINE_RUN_KEYS};
use crate::Failure;

/// Parsed command line plus, for `pipeline`, the configuration fields read
/// from the config file.
pub struct Loaded {
    pub cli: Cli,
    pub pipeline: Map<String, Value>,
}

fn parse(args: &[OsString]) -> std::result::Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

pub fn load(mut args: Vec<OsString>) -> std::result::Result<Loaded, Failure> {
    let cli = parse(&args)?;
    let Some(path) = cli.config.clone() else {
        return Ok(Loaded { cli, pipeline: Map::new() });
    };
    let text = fs::read_to_string(&path).map_err(Error::at_path(&path))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(Error::invalid(format!("{}: config must be a JSON object", path.display())).into());
    };

    let sub = cli.command.name();
    let (flags, pipeline): (Map<String, Value>, Map<String, Value>) = if sub == "pipeline" {
        map.into_iter().partition(|(k, _)| PIPELINE_RUN_KEYS.contains(&k.replace('-', "_").as_str()))
    } else {
        (map, Map::new())
    };
    let extra = flag_args(sub, flags)?;
    let at = args.iter().skip(1).position(|a| a == sub).map(|p| p + 2).expect("parsed subcommand appears in argv");
    args.splice(at..at, extra);
    Ok(Loaded { cli: parse(&args)?, pipeline })
}

fn flag_args(sub: &str, flags: Map<String, Value>) -> Result<Vec<OsString>> {
    let mut root = Cli::command();
    root.build();
    let cmd = root.find_subcommand(sub).expect("known subcommand");
    let mut out = Vec::new();
    for (key, value) in flags {
        let long = key.replace('_', "-");
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(long.as_str()) && !matches!(long.as_str(), "config" | "help" | "version"))
            .ok_or_else(|| Error::invalid(format!("unknown config key '{key}' for {sub}")))?;
        if !arg.get_action().takes_values() {
            match value {
                Value::Bool(true) => out.push(format!("--{long}").into()),
                Value::Bool(false) => {}
                _ => return Err(Error::invalid(format!("config key '{key}' must be true or false"))),
            }
            continue;
        }
        let text = match value {
            Value::Null => continue,
            Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(","),
            other => scalar(&other)?,
        };
        out.push(format!("--{long}={text}").into());
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(Error::invalid(format!("config value {v} is not a scalar"))),
    }
}
