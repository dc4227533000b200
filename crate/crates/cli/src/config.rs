//! Flat `key = value` configuration files. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const KEYS: &[&str] = &["tol", "grid", "out", "format", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}' (expected json or csv)")),
        }
    }
}

/// Settings after merging flags, the config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Overrides every check's own tolerance when present.
    pub tol: Option<f64>,
    pub grid: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: None,
            grid: 48,
            out: None,
            format: Format::Json,
            seed: 0,
        }
    }
}

impl Settings {
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

/// Flag values as given on the command line (all optional).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key '{key}' (known: {})",
                k + 1,
                KEYS.join(", ")
            )));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parsed<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
        })
        .transpose()
}

/// Flags take precedence over the config file, which takes precedence over defaults.
pub fn resolve(flags: Overrides, config: Option<&Path>) -> Result<Settings, CliError> {
    let file = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let d = Settings::default();
    let s = Settings {
        tol: flags.tol.or(parsed(&file, "tol")?),
        grid: flags.grid.or(parsed(&file, "grid")?).unwrap_or(d.grid),
        out: flags.out.or(parsed(&file, "out")?),
        format: flags.format.or(parsed(&file, "format")?).unwrap_or(d.format),
        seed: flags.seed.or(parsed(&file, "seed")?).unwrap_or(d.seed),
    };
    if s.grid < 8 {
        return Err(CliError::Usage(format!("grid {} is below the minimum of 8", s.grid)));
    }
    if let Some(t) = s.tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let m = parse_config("# defaults\n\ngrid = 32\nseed=7 # trailing\n").unwrap();
        assert_eq!(m["grid"], "32");
        assert_eq!(m["seed"], "7");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("grid 32").is_err());
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = std::env::temp_dir().join(format!("laglab-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "grid = 32\nseed = 5\nformat = csv\n").unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let s = resolve(flags, Some(&path)).unwrap();
        assert_eq!((s.grid, s.seed, s.format), (32, 9, Format::Csv));
        assert_eq!(s.tol, None);
        let s = resolve(Overrides::default(), None).unwrap();
        assert_eq!(s, Settings::default());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
