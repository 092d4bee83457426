//! Merging a JSON config file under the command line.
//!
//! The file is an object whose top-level keys apply to every subcommand and
//! whose subcommand-named objects apply to that subcommand only. Values
//! that were not given as flags are turned back into flags and the command
//! line is parsed again, so clap stays the single source of validation and
//! defaults.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command};
use serde_json::{Map, Value};

use crate::usage;

const SKIP: [&str; 4] = ["help", "version", "config", "run_json"];

pub fn merge(cmd: &Command, mut argv: Vec<OsString>, path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let config: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(top) = config else {
        return Err(usage(format!("config {} must be a JSON object", path.display())));
    };
    let matches = lenient(cmd).try_get_matches_from(&argv)?;
    let Some((name, sub_matches)) = matches.subcommand() else {
        return Ok(argv);
    };
    let section = match top.get(name) {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(usage(format!("config section {name:?} must be an object"))),
        None => Map::new(),
    };
    let sub = cmd.find_subcommand(name).expect("matched subcommand exists");

    let mut extra = Vec::new();
    for arg in sub.get_arguments().chain(cmd.get_arguments()) {
        let id = arg.get_id().as_str();
        if SKIP.contains(&id) || given(sub_matches, id) || given(&matches, id) {
            continue;
        }
        let kebab = id.replace('_', "-");
        let value = [&section, &top]
            .iter()
            .find_map(|m| m.get(id).or_else(|| m.get(&kebab)));
        let Some(value) = value else { continue };
        let long = arg.get_long().unwrap_or(id);
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                Value::Bool(true) => extra.push(OsString::from(format!("--{long}"))),
                Value::Bool(false) => {}
                _ => return Err(usage(format!("config key {id:?} must be true or false"))),
            },
            _ => extra.push(OsString::from(format!("--{long}={}", flag_text(id, value)?))),
        }
    }
    argv.extend(extra);
    Ok(argv)
}

/// `cmd` with no argument required, so values still missing from the
/// command line can come from the config file.
pub fn lenient(cmd: &Command) -> Command {
    cmd.clone()
        .mut_args(|a| a.required(false))
        .mut_subcommands(|s| s.mut_args(|a| a.required(false)))
}

fn given(m: &ArgMatches, id: &str) -> bool {
    match m.try_get_raw(id) {
        Ok(Some(_)) => matches!(
            m.value_source(id),
            Some(ValueSource::CommandLine | ValueSource::EnvVariable)
        ),
        _ => false,
    }
}

fn flag_text(id: &str, value: &Value) -> Result<String> {
    Ok(match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items
            .iter()
            .map(|v| flag_text(id, v))
            .collect::<Result<Vec<_>>>()?
            .join(","),
        _ => return Err(usage(format!("config key {id:?} has an unsupported value"))),
    })
}
