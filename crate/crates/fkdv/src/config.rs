//! Flat key=value run-configuration files.
//!
//! One `key = value` pair per line; blank lines and full-line comments
//! starting with `#` or `;` are ignored. Keys use `[A-Za-z0-9_.-]`.
//! A later assignment to the same key wins. Section headers are not
//! part of the format and are rejected so a stray INI file fails fast.

use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("key {key}: expected {expected}, got {value:?}")]
    BadValue {
        key: String,
        expected: &'static str,
        value: String,
    },
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') {
                return Err(parse_err(line_no, "section headers are not supported"));
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_err(line_no, format!("expected key=value, got {line:?}")));
            };
            let key = key.trim();
            if !valid_key(key) {
                return Err(parse_err(line_no, format!("invalid key {key:?}")));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn bad(&self, key: &str, expected: &'static str) -> ConfigError {
        ConfigError::BadValue {
            key: key.to_string(),
            expected,
            value: self.get(key).unwrap_or_default().to_string(),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.bad(key, "a finite number")),
            },
        }
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<u32>()
                .map(Some)
                .map_err(|_| self.bad(key, "an unsigned integer")),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.bad(key, "an unsigned integer")),
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: Result<Vec<f64>, _> =
                    v.split(',').map(|item| item.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(xs) if !xs.is_empty() && xs.iter().all(|x| x.is_finite()) => Ok(Some(xs)),
                    _ => Err(self.bad(key, "a comma-separated list of finite numbers")),
                }
            }
        }
    }

    pub fn get_u32_list(&self, key: &str) -> Result<Option<Vec<u32>>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: Result<Vec<u32>, _> =
                    v.split(',').map(|item| item.trim().parse::<u32>()).collect();
                match parsed {
                    Ok(xs) if !xs.is_empty() => Ok(Some(xs)),
                    _ => Err(self.bad(key, "a comma-separated list of unsigned integers")),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_duplicates() {
        let text = "\n# comment\n; another\n  alpha = 2.0 \nk=3\nk = 4\nout.dir = runs/a\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.get_f64("alpha").unwrap(), Some(2.0));
        assert_eq!(cfg.get_u32("k").unwrap(), Some(4)); // last assignment wins
        assert_eq!(cfg.get("out.dir"), Some("runs/a"));
        assert_eq!(cfg.get("missing"), None);
        assert_eq!(cfg.keys().collect::<Vec<_>>(), vec!["alpha", "k", "out.dir"]);
    }

    #[test]
    fn rejects_sections_bare_words_and_bad_keys() {
        assert!(Config::parse("[run]\nalpha=2").is_err());
        assert!(Config::parse("alpha").is_err());
        assert!(Config::parse("bad key=1").is_err());
        assert!(Config::parse("=1").is_err());
    }

    #[test]
    fn typed_getters_validate() {
        let cfg = Config::parse("a=abc\nb=1e309\nc=-1\nd=2.5").unwrap();
        assert!(cfg.get_f64("a").is_err());
        assert!(cfg.get_f64("b").is_err()); // overflows to inf
        assert!(cfg.get_u32("c").is_err());
        assert!(cfg.get_u32("d").is_err());
        assert_eq!(cfg.get_f64("d").unwrap(), Some(2.5));
        assert_eq!(cfg.get_f64("zzz").unwrap(), None);
    }

    #[test]
    fn list_getters_split_on_commas() {
        let cfg = Config::parse("alphas = 1.5, 2, 3\nks=1,2\nempty=\nbad=1,x").unwrap();
        assert_eq!(cfg.get_f64_list("alphas").unwrap(), Some(vec![1.5, 2.0, 3.0]));
        assert_eq!(cfg.get_u32_list("ks").unwrap(), Some(vec![1, 2]));
        assert!(cfg.get_f64_list("empty").is_err());
        assert!(cfg.get_f64_list("bad").is_err());
        assert_eq!(cfg.get_f64_list("nope").unwrap(), None);
    }

    #[test]
    fn parse_never_panics_on_odd_input() {
        for text in ["==", "a==b", "a=b=c", "\u{0}=1", "k =", " = ", "#[x]"] {
            let _ = Config::parse(text);
        }
        let cfg = Config::parse("a==b\nx=b=c").unwrap();
        assert_eq!(cfg.get("a"), Some("=b"));
        assert_eq!(cfg.get("x"), Some("b=c"));
    }
}
