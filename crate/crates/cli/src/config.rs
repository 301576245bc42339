//! `--config file.json` support.
//!
//! A config file is a flat JSON object whose keys are flag names (with `_`
//! or `-`) plus an optional `"command"`. It is turned into flags placed
//! before the user's own flags; since every option overrides itself, the
//! command line wins on conflict.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("config {path} is not a JSON object: {reason}")]
    Parse { path: String, reason: String },
    #[error("config key '{key}': {reason}")]
    Value { key: String, reason: String },
    #[error("--config needs a path")]
    MissingPath,
    #[error("no subcommand given on the command line or in the config")]
    NoCommand,
}

/// Extracts `--config PATH` / `--config=PATH` from `args` (program name excluded).
pub fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<PathBuf>, ConfigError> {
    let mut found = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--" {
            break;
        }
        if a == "--config" {
            if i + 1 >= args.len() {
                return Err(ConfigError::MissingPath);
            }
            found = Some(PathBuf::from(args.remove(i + 1)));
            args.remove(i);
        } else if let Some(p) = a.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(found)
}

/// Parsed config: the subcommand, if named, and the equivalent flags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigFlags {
    pub command: Option<String>,
    pub flags: Vec<String>,
}

pub fn parse_config(path: &str, text: &str) -> Result<ConfigFlags, ConfigError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse { path: path.into(), reason: e.to_string() })?;
    let Value::Object(map) = value else {
        return Err(ConfigError::Parse { path: path.into(), reason: "top level must be an object".into() });
    };
    let mut out = ConfigFlags::default();
    for (key, v) in map {
        let bad = |reason: &str| ConfigError::Value { key: key.clone(), reason: reason.into() };
        if key == "command" {
            match v {
                Value::String(s) => out.command = Some(s),
                _ => return Err(bad("must be a string")),
            }
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => out.flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Option<Vec<_>>>().ok_or_else(|| bad("arrays may hold only numbers and strings"))?;
                out.flags.push(format!("{flag}={}", parts.join(",")));
            }
            other => {
                let s = scalar(&other).ok_or_else(|| bad("nested objects are not supported"))?;
                out.flags.push(format!("{flag}={s}"));
            }
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Builds the argument list clap sees: `[program, leading flags, command,
/// config flags, user flags]`.
pub fn merge(program: OsString, user: Vec<OsString>, config: ConfigFlags) -> Result<Vec<OsString>, ConfigError> {
    // the subcommand is the first token that is not a flag
    let pos = user.iter().position(|a| !a.to_string_lossy().starts_with('-'));
    let mut out = vec![program];
    match pos {
        Some(p) => {
            out.extend(user[..=p].iter().cloned());
            out.extend(config.flags.into_iter().map(OsString::from));
            out.extend(user[p + 1..].iter().cloned());
        }
        None => {
            let cmd = config.command.ok_or(ConfigError::NoCommand)?;
            out.extend(user.iter().cloned());
            out.push(cmd.into());
            out.extend(config.flags.into_iter().map(OsString::from));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn extracts_config_path() {
        let mut a = os(&["classify", "--config", "c.json", "--x", "1"]);
        assert_eq!(take_config_path(&mut a).unwrap(), Some(PathBuf::from("c.json")));
        assert_eq!(a, os(&["classify", "--x", "1"]));
        let mut a = os(&["--config=d.json", "epd"]);
        assert_eq!(take_config_path(&mut a).unwrap(), Some(PathBuf::from("d.json")));
        assert!(matches!(take_config_path(&mut os(&["--config"])), Err(ConfigError::MissingPath)));
    }

    #[test]
    fn json_becomes_flags() {
        let c = parse_config("c", r#"{"command": "classify", "x": [-0.5, 2], "transonic_labels": true, "m": 1.5, "eps_k": false}"#)
            .unwrap();
        assert_eq!(c.command.as_deref(), Some("classify"));
        let mut f = c.flags.clone();
        f.sort();
        assert_eq!(f, vec!["--m=1.5", "--transonic-labels", "--x=-0.5,2"]);
        assert!(parse_config("c", "[1]").is_err());
        assert!(parse_config("c", r#"{"grid": {"nx": 3}}"#).is_err());
    }

    #[test]
    fn user_flags_come_last() {
        let c = ConfigFlags { command: Some("epd".into()), flags: vec!["--m=2".into()] };
        let m = merge("mtpde".into(), os(&["classify", "--m", "1"]), c.clone()).unwrap();
        assert_eq!(m, os(&["mtpde", "classify", "--m=2", "--m", "1"]));
        let m = merge("mtpde".into(), os(&[]), c).unwrap();
        assert_eq!(m, os(&["mtpde", "epd", "--m=2"]));
        assert!(matches!(merge("p".into(), os(&[]), ConfigFlags::default()), Err(ConfigError::NoCommand)));
    }
}
