//! Run configuration files (TOML or JSON) and the `OPUC_GRID_M` override.

use opuc::suites::RunConfig;
use std::path::Path;

pub const GRID_ENV: &str = "OPUC_GRID_M";

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "{e}"),
            ConfigError::Parse(s) => f.write_str(s),
        }
    }
}

/// JSON if the extension says so, TOML otherwise. A blank file is an empty config.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    parse(&text, is_json(path)).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn parse(text: &str, json: bool) -> Result<RunConfig, String> {
    if text.trim().is_empty() {
        return Ok(RunConfig::default());
    }
    if json {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                format!("line {line}, column {col}: {}", e.message())
            }
            None => e.to_string(),
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Grid override from the environment; `Ok(None)` when unset.
pub fn grid_from_env() -> Result<Option<usize>, String> {
    match std::env::var(GRID_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&m| m > 0)
            .map(Some)
            .ok_or_else(|| format!("{GRID_ENV} must be a positive integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}
