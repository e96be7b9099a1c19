//! `key = value` config files and `lo:hi` ranges.

use std::collections::HashSet;
use std::ffi::OsString;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: invalid key `{key}` (letters, digits, `-` and `_` only)")]
    BadKey { line: usize, key: String },
    #[error("line {line}: `{key}` given more than once")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}` cannot be set from a config file")]
    Forbidden { line: usize, key: String },
}

/// Parses a config file into `(flag, value)` pairs in file order.
///
/// Blank lines and lines starting with `#` are skipped; keys are
/// normalised to lower-case flag names (`sigma_a` becomes `sigma-a`).
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or(ConfigError::MissingEquals { line })?;
        let key = k
            .trim()
            .trim_start_matches("--")
            .to_ascii_lowercase()
            .replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError::EmptyKey { line });
        }
        if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(ConfigError::BadKey { line, key });
        }
        if key == "config" || key == "help" || key == "version" {
            return Err(ConfigError::Forbidden { line, key });
        }
        if !seen.insert(key.clone()) {
            return Err(ConfigError::Duplicate { line, key });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Flag tokens for config entries; an empty value yields a bare switch.
pub fn config_tokens(entries: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        out.push(OsString::from(format!("--{k}")));
        if !v.is_empty() {
            out.push(OsString::from(v));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid range `{0}`: expected `lo:hi` with finite lo < hi")]
pub struct RangeError(pub String);

/// Parses `lo:hi` (also `lo,hi` or `lo..hi`).
pub fn parse_range(s: &str) -> Result<(f64, f64), RangeError> {
    let err = || RangeError(s.to_string());
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(':'))
        .or_else(|| s.split_once(','))
        .ok_or_else(err)?;
    let lo: f64 = a.trim().parse().map_err(|_| err())?;
    let hi: f64 = b.trim().parse().map_err(|_| err())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(err());
    }
    Ok((lo, hi))
}

/// Location of `--config` in raw arguments, with its value.
pub(crate) fn find_config(args: &[OsString]) -> Option<(usize, usize, OsString)> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return args.get(i + 1).map(|v| (i, 2, v.clone()));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some((i, 1, OsString::from(v)));
        }
    }
    None
}
