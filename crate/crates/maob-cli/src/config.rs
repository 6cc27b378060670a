//! Flat key = value configuration with bracketed sections. Every key a
//! driver does not read is an error, so typos fail loudly instead of
//! silently running defaults.

use std::cell::RefCell;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug)]
pub struct Config {
    /// (section, key, value) in file order; section "" is the preamble.
    entries: Vec<(String, String, String)>,
    used: RefCell<HashSet<(String, String)>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {}: unterminated section header", lineno + 1))?
                    .trim();
                if name.is_empty() {
                    bail!("line {}: empty section name", lineno + 1);
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            if key.is_empty() {
                bail!("line {}: empty key", lineno + 1);
            }
            if entries
                .iter()
                .any(|(s, k, _)| s == &section && k == key)
            {
                bail!("line {}: duplicate key {section}.{key}", lineno + 1);
            }
            entries.push((section.clone(), key.to_string(), value.trim().to_string()));
        }
        Ok(Config { entries, used: RefCell::new(HashSet::new()) })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_pairs(pairs: &[(&str, &str, &str)]) -> Config {
        Config {
            entries: pairs
                .iter()
                .map(|(s, k, v)| (s.to_string(), k.to_string(), v.to_string()))
                .collect(),
            used: RefCell::new(HashSet::new()),
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.used
            .borrow_mut()
            .insert((section.to_string(), key.to_string()));
        self.entries
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| anyhow!("missing required key [{section}] {key}"))
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|v| v.parse::<f64>().with_context(|| format!("[{section}] {key} = {v}")))
            .transpose()
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(section, key)?.unwrap_or(default))
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        self.get(section, key)
            .map(|v| v.parse::<usize>().with_context(|| format!("[{section}] {key} = {v}")))
            .transpose()
    }

    pub fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_usize(section, key)?.unwrap_or(default))
    }

    /// Comma-separated list of reals.
    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|v| {
                v.split(',')
                    .map(|t| t.trim().parse::<f64>().with_context(|| format!("[{section}] {key} = {v}")))
                    .collect::<Result<Vec<f64>>>()
            })
            .transpose()
    }

    /// Error on any key never read by the consuming driver.
    pub fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(s, k, _)| !used.contains(&(s.clone(), k.clone())))
            .map(|(s, k, _)| if s.is_empty() { k.clone() } else { format!("[{s}] {k}") })
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            bail!("unknown configuration keys: {}", unknown.join(", "))
        }
    }

    /// Echo of every entry, for report headers.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|(s, k, v)| {
                let name = if s.is_empty() { k.clone() } else { format!("{s}.{k}") };
                (name, v.clone())
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut cur = String::new();
        for (s, k, v) in &self.entries {
            if s != &cur {
                let _ = writeln!(out, "[{s}]");
                cur = s.clone();
            }
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_values() {
        let c = Config::parse("a = 1\n[run]\nn = 3\nq = 0.5\n# note\nres = 65\n").unwrap();
        assert_eq!(c.get("", "a"), Some("1"));
        assert_eq!(c.get_usize("run", "n").unwrap(), Some(3));
        assert_eq!(c.get_f64("run", "q").unwrap(), Some(0.5));
        assert_eq!(c.get_usize("run", "res").unwrap(), Some(65));
        c.reject_unknown().unwrap();
    }

    #[test]
    fn unread_keys_are_rejected() {
        let c = Config::parse("[run]\nn = 3\ntypo = 1\n").unwrap();
        let _ = c.get("run", "n");
        let err = c.reject_unknown().unwrap_err().to_string();
        assert!(err.contains("[run] typo"), "{err}");
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("just words\n").is_err());
        assert!(Config::parse("[open\n").is_err());
        assert!(Config::parse("[r]\na = 1\na = 2\n").is_err());
    }

    #[test]
    fn parses_lists() {
        let c = Config::parse("t_list = 0.1, 0.05,0.01\n").unwrap();
        assert_eq!(c.get_f64_list("", "t_list").unwrap().unwrap(), vec![0.1, 0.05, 0.01]);
    }
}
