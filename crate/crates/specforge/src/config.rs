//! Settings from a `key = value` file, with `SPECFORGE_SOLVER`
//! overriding the solver path.

use std::path::{Path, PathBuf};

pub const SOLVER_ENV: &str = "SPECFORGE_SOLVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub solver: PathBuf,
    pub solver_args: Vec<String>,
    /// Per-check timeout in milliseconds.
    pub timeout_ms: u64,
    pub port: u16,
    pub session_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            solver: PathBuf::from("z3"),
            solver_args: vec!["-in".into(), "-smt2".into()],
            timeout_ms: 30_000,
            port: 7878,
            session_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl Config {
    /// Parse `key = value` lines. Blank lines and `#` comments are
    /// skipped; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Syntax { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "solver" => c.solver = PathBuf::from(value),
                "solver_args" => c.solver_args = value.split_whitespace().map(String::from).collect(),
                "timeout_ms" => c.timeout_ms = value.parse().map_err(|_| err(format!("bad timeout `{value}`")))?,
                "port" => c.port = value.parse().map_err(|_| err(format!("bad port `{value}`")))?,
                "session_dir" => c.session_dir = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Config::parse(&text)
    }

    /// Applies `SPECFORGE_SOLVER` when set.
    pub fn with_env(mut self) -> Config {
        if let Some(p) = std::env::var_os(SOLVER_ENV) {
            if !p.is_empty() {
                self.solver = PathBuf::from(p);
            }
        }
        self
    }
}
