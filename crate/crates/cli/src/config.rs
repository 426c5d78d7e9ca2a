//! `--config` handling. A config file holds flat `key = value` pairs named
//! after the long flags, optionally grouped under a `[simulate]`, `[ode]`,
//! `[lowerbound]` or `[verify]` table. A manifest written by an earlier run is
//! accepted too. File values are inserted before the command-line flags so the
//! latter win.

use anyhow::{bail, Context, Result};
use std::ffi::OsString;
use std::path::Path;

pub const SUBCOMMANDS: [&str; 4] = ["simulate", "ode", "lowerbound", "verify"];

pub fn inject(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = strs.get(i + 1).cloned();
        }
    }
    let Some(path) = path else { return Ok(args) };
    let Some(sub) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let flags = load_flags(Path::new(&path), &strs[sub])?;
    let mut out = args;
    out.splice(sub + 1..sub + 1, flags.into_iter().map(OsString::from));
    Ok(out)
}

/// Flags contributed by `path` for subcommand `sub`.
pub fn load_flags(path: &Path, sub: &str) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut flags = Vec::new();
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).context("parsing manifest")?;
        let cfg = &v["config"];
        if cfg["command"].as_str() != Some(sub) {
            bail!("manifest {} records a `{}` run, not `{sub}`", path.display(), cfg["command"]);
        }
        let Some(map) = cfg["flags"].as_object() else { bail!("manifest has no config.flags") };
        for (k, v) in map {
            push_json(&mut flags, k, v)?;
        }
        return Ok(flags);
    }
    let table: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
    for (k, v) in &table {
        match v {
            toml::Value::Table(t) if k == sub => {
                for (k2, v2) in t {
                    push_toml(&mut flags, k2, v2)?;
                }
            }
            toml::Value::Table(_) if SUBCOMMANDS.contains(&k.as_str()) => {}
            toml::Value::Table(_) => bail!("unknown config section [{k}]"),
            _ => push_toml(&mut flags, k, v)?,
        }
    }
    Ok(flags)
}

fn push_toml(flags: &mut Vec<String>, k: &str, v: &toml::Value) -> Result<()> {
    if k == "config" {
        bail!("a config file cannot name another config file");
    }
    match v {
        toml::Value::Boolean(true) => flags.push(format!("--{k}")),
        toml::Value::Boolean(false) => {}
        toml::Value::String(s) => flags.push(format!("--{k}={s}")),
        toml::Value::Integer(i) => flags.push(format!("--{k}={i}")),
        toml::Value::Float(x) => flags.push(format!("--{k}={x}")),
        toml::Value::Array(a) => {
            for item in a {
                push_toml(flags, k, item)?;
            }
        }
        _ => bail!("unsupported value for config key `{k}`"),
    }
    Ok(())
}

fn push_json(flags: &mut Vec<String>, k: &str, v: &serde_json::Value) -> Result<()> {
    use serde_json::Value;
    match v {
        Value::Bool(true) => flags.push(format!("--{k}")),
        Value::Bool(false) | Value::Null => {}
        Value::String(s) => flags.push(format!("--{k}={s}")),
        Value::Number(x) => flags.push(format!("--{k}={x}")),
        Value::Array(a) => {
            for item in a {
                push_json(flags, k, item)?;
            }
        }
        Value::Object(_) => bail!("unsupported value for manifest key `{k}`"),
    }
    Ok(())
}

/// Resolved flags of a parsed command line as a flat map, the inverse of
/// [`load_flags`].
pub fn flat_flags(cli: &crate::Cli) -> serde_json::Map<String, serde_json::Value> {
    let mut map = serde_json::Map::new();
    if let serde_json::Value::Object(common) = serde_json::to_value(&cli.common).expect("serialisable") {
        map.extend(common);
    }
    if let serde_json::Value::Object(cmd) = serde_json::to_value(&cli.cmd).expect("serialisable") {
        for (_, inner) in cmd {
            if let serde_json::Value::Object(fields) = inner {
                map.extend(fields);
            }
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_sections_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "n = 500\nseed = 3\n[simulate]\nstrategy = \"fr\"\nstop = [\"unsat:0.1\", \"ham\"]\n[ode]\nN = 4\n")
            .unwrap();
        let args: Vec<OsString> = ["semiham", "--config", p.to_str().unwrap(), "simulate", "--seed", "9"]
            .iter()
            .map(OsString::from)
            .collect();
        let got: Vec<String> = inject(args).unwrap().iter().map(|a| a.to_string_lossy().into_owned()).collect();
        let sub = got.iter().position(|a| a == "simulate").unwrap();
        assert_eq!(
            &got[sub + 1..],
            ["--n=500", "--seed=3", "--stop=unsat:0.1", "--stop=ham", "--strategy=fr", "--seed", "9"]
        );
    }
}
