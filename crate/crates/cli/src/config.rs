//! `--config` files: flat TOML whose keys are long flag names.
//!
//! ```toml
//! alpha = 0.3
//! epochs = 40
//! train = "crowd.conll"
//! ```
//!
//! The values are spliced into the argument list right after the subcommand,
//! so anything given on the command line later overrides them.

use std::ffi::OsString;

use crate::CliError;

/// Global options that take a value and may precede the subcommand.
const GLOBAL_WITH_VALUE: [&str; 2] = ["--threads", "--config"];

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter().skip(1);
    let mut found = None;
    while let Some(arg) = iter.next() {
        let Some(s) = arg.to_str() else { continue };
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = iter.next().cloned();
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(v.into());
        }
    }
    found
}

fn subcommand_index(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_str()?;
        if !s.starts_with('-') {
            return Some(i);
        }
        i += if GLOBAL_WITH_VALUE.contains(&s) { 2 } else { 1 };
    }
    None
}

fn value_to_args(key: &str, value: &toml::Value) -> Result<Vec<OsString>, CliError> {
    let flag = format!("--{key}");
    let scalar = |v: &toml::Value| -> Result<String, CliError> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            _ => Err(CliError::Usage(format!("config key {key:?}: unsupported value {v}"))),
        }
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag.into()],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
            vec![flag.into(), joined.into()]
        }
        other => vec![flag.into(), scalar(other)?.into()],
    })
}

/// Returns `args` with the config file's values spliced in.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.to_string_lossy())))?;
    let Some(at) = subcommand_index(&args) else {
        return Ok(args);
    };
    let mut spliced = Vec::new();
    for (key, value) in &table {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if matches!(value, toml::Value::Table(_)) {
            return Err(CliError::Usage(format!("config key {key:?}: nested tables are not supported")));
        }
        spliced.extend(value_to_args(key, value)?);
    }
    let mut out = args;
    out.splice(at + 1..at + 1, spliced);
    Ok(out)
}
