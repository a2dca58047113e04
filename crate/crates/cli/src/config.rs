//! `key = value` experiment files, expanded into command-line flags.
//!
//! ```text
//! # theta at a nonsplit trace
//! command = theta
//! p = 5
//! b = 1
//! N = 4
//! ```
//!
//! Flags given on the command line after `--config` override file values.

use std::fs;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("--config needs a file path")]
    MissingPath,
    #[error("cannot read config file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("config names command {config:?} but the command line names {cli:?}")]
    CommandMismatch { config: String, cli: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub params: Vec<(String, String)>,
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        if k == "command" {
            cfg.command = Some(v.to_string());
        } else {
            cfg.params.push((k.to_string(), v.to_string()));
        }
    }
    Ok(cfg)
}

/// Replaces `--config FILE` in `args` by the file's command and flags.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    let prog = it.next().unwrap_or_else(|| "tracelab".to_string());
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or(ConfigError::MissingPath)?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        let mut out = vec![prog];
        out.extend(rest);
        return Ok(out);
    };
    let text = fs::read_to_string(&path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
    let cfg = parse(&text)?;

    let cli_command = rest.first().filter(|a| !a.starts_with('-')).cloned();
    let command = match (&cfg.command, &cli_command) {
        (Some(c), Some(cli)) if c != cli => {
            return Err(ConfigError::CommandMismatch { config: c.clone(), cli: cli.clone() })
        }
        (_, Some(cli)) => {
            rest.remove(0);
            Some(cli.clone())
        }
        (Some(c), None) => Some(c.clone()),
        (None, None) => None,
    };

    let mut out = vec![prog];
    out.extend(command);
    for (k, v) in cfg.params {
        out.push(format!("--{k}"));
        out.push(v);
    }
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_key_values() {
        let cfg = parse("# c\ncommand = theta\np=5\n--N = 4  # trailing\n\n").unwrap();
        assert_eq!(cfg.command.as_deref(), Some("theta"));
        assert_eq!(cfg.params, vec![("p".into(), "5".into()), ("N".into(), "4".into())]);
        assert!(matches!(parse("oops"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn no_config_is_identity() {
        let a = s(&["tracelab", "theta", "--p", "5"]);
        assert_eq!(expand_args(a.clone()).unwrap(), a);
    }

    #[test]
    fn config_flags_precede_cli_flags() {
        let dir = std::env::temp_dir().join(format!("tracelab-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("run.cfg");
        std::fs::write(&f, "command = theta\np = 5\nb = 1\n").unwrap();
        let path = f.to_str().unwrap();
        let out = expand_args(s(&["tracelab", "--config", path, "--b", "0"])).unwrap();
        assert_eq!(out, s(&["tracelab", "theta", "--p", "5", "--b", "1", "--b", "0"]));
        let out = expand_args(s(&["tracelab", "theta", "--config", path])).unwrap();
        assert_eq!(out[1], "theta");
        assert!(matches!(
            expand_args(s(&["tracelab", "poisson", "--config", path])),
            Err(ConfigError::CommandMismatch { .. })
        ));
        std::fs::remove_dir_all(&dir).ok();
    }
}
