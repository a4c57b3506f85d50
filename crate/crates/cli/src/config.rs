//! Line-oriented `key=value` experiment configs with `#` comments.

use edgeflow_core::{EdgeflowError, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
    pub raw: String,
    base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        let base_dir = path
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."));
        Self::parse(&raw, base_dir)
    }

    pub fn parse(raw: &str, base_dir: PathBuf) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| EdgeflowError::Parse {
                line: idx + 1,
                message: format!("expected key=value, got `{line}`"),
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            values,
            raw: raw.to_string(),
            base_dir,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| EdgeflowError::Validation(format!("bad `{key}` = `{s}`: {e}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| EdgeflowError::Validation(format!("bad `{key}` = `{s}`: {e}"))),
        }
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| EdgeflowError::Validation(format!("bad `{key}` = `{s}`: {e}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(s) => Err(EdgeflowError::Validation(format!(
                "bad boolean `{key}` = `{s}`"
            ))),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|tok| {
                    tok.trim().parse().map_err(|e| {
                        EdgeflowError::Validation(format!("bad entry `{tok}` in `{key}`: {e}"))
                    })
                })
                .collect(),
        }
    }

    /// Path value, resolved relative to the config file location.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|s| {
            let p = PathBuf::from(s);
            if p.is_absolute() {
                p
            } else {
                self.base_dir.join(p)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let c = Config::parse("# comment\nf=3\nx_max = 2.5\nname=unit sphere\n", ".".into())
            .unwrap();
        assert_eq!(c.u32_or("f", 0).unwrap(), 3);
        assert_eq!(c.f64_or("x_max", 0.0).unwrap(), 2.5);
        assert_eq!(c.get("name"), Some("unit sphere"));
        assert_eq!(c.f64_or("absent", 7.0).unwrap(), 7.0);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Config::parse("just a token\n", ".".into()).is_err());
    }

    #[test]
    fn lists_parse() {
        let c = Config::parse("mu_list=0.5, 1, 2\n", ".".into()).unwrap();
        assert_eq!(c.f64_list("mu_list", &[]).unwrap(), vec![0.5, 1.0, 2.0]);
    }
}
