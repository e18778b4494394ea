//! `--config FILE` support: flat `key = value` lines, `#` comments.
//!
//! Each entry becomes the flag `--key value` (underscores read as hyphens)
//! unless that flag is already on the command line, so flags always win.

use std::path::Path;

use anyhow::{Context, Result};

/// A `key = value` file, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, monoproj::Error> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| monoproj::Error::Parse {
            line: i + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(monoproj::Error::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(ConfigFile { entries })
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(monoproj::Error::from)
        .with_context(|| format!("reading config file {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config file {}", path.display()))
}

/// Removes `--config PATH` / `--config=PATH` from `argv`, returning the path.
pub fn take_config_flag(argv: &mut Vec<String>) -> Option<String> {
    let pos = argv
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))?;
    let flag = argv.remove(pos);
    if let Some(v) = flag.strip_prefix("--config=") {
        return Some(v.to_string());
    }
    if pos < argv.len() {
        Some(argv.remove(pos))
    } else {
        // let clap report the missing value
        argv.insert(pos, flag);
        None
    }
}

/// Appends config entries as flags, skipping any flag given explicitly.
pub fn merge_into_argv(argv: &mut Vec<String>, cfg: &ConfigFile) {
    for (key, value) in &cfg.entries {
        let flag = format!("--{key}");
        let present = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if !present {
            argv.push(flag);
            argv.push(value.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_keys_values_and_comments() {
        let cfg = parse_config("# header\n tau = 0.5 # inline\n\nmax_iter=300\n").unwrap();
        assert_eq!(
            cfg.entries,
            vec![
                ("tau".into(), "0.5".into()),
                ("max-iter".into(), "300".into())
            ]
        );
    }

    #[test]
    fn missing_equals_reports_line() {
        match parse_config("a = 1\nbogus\n") {
            Err(monoproj::Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flags_override_file_values() {
        let mut argv = args("monoproj solve --tau 0.2");
        let cfg = parse_config("tau = 0.9\nrho = 0.4\n").unwrap();
        merge_into_argv(&mut argv, &cfg);
        assert_eq!(argv, args("monoproj solve --tau 0.2 --rho 0.4"));

        let mut argv = args("monoproj solve --rho=0.3");
        merge_into_argv(&mut argv, &cfg);
        assert_eq!(argv, args("monoproj solve --rho=0.3 --tau 0.9"));
    }

    #[test]
    fn config_flag_is_extracted() {
        let mut argv = args("monoproj solve --config run.cfg --n 10");
        assert_eq!(take_config_flag(&mut argv).as_deref(), Some("run.cfg"));
        assert_eq!(argv, args("monoproj solve --n 10"));

        let mut argv = args("monoproj --config=a.cfg bench");
        assert_eq!(take_config_flag(&mut argv).as_deref(), Some("a.cfg"));
        assert_eq!(argv, args("monoproj bench"));

        let mut argv = args("monoproj solve");
        assert_eq!(take_config_flag(&mut argv), None);
    }
}
